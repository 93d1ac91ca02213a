//! The simulation thread and the state it shares with request handlers.
//!
//! Handlers never touch the world directly: they read the latest
//! between-tick document and send commands through a queue that the
//! simulation thread drains between ticks.

use std::io::{self, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use rdsim_core::engine::{Ack, Command, CommandError, LoggedCommand, Simulation, Snapshot};
use rdsim_core::{Scenario, TraceWriter};
use serde::Serialize;
use tokio::sync::{broadcast, oneshot};

/// Snapshot as served: the world between two ticks plus the run flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDoc {
    #[serde(flatten)]
    pub snapshot: Snapshot,
    pub paused: bool,
}

#[derive(Debug, Clone)]
pub enum Event {
    /// Published after every tick.
    Tick(Arc<StateDoc>),
    /// Published periodically while paused.
    Heartbeat { tick: u64 },
}

pub type Sink = Box<dyn Write + Send>;

pub struct SessionOptions {
    /// Wall-clock pacing; `None` runs as fast as possible.
    pub ticks_per_second: Option<f64>,
    pub start_paused: bool,
    pub heartbeat: Duration,
    pub trace: Option<Sink>,
    pub snapshot_every: u64,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            ticks_per_second: Some(10.0),
            start_paused: false,
            heartbeat: Duration::from_secs(1),
            trace: None,
            snapshot_every: rdsim_core::trace::DEFAULT_SNAPSHOT_EVERY,
        }
    }
}

enum Request {
    Command { command: Command, reply: oneshot::Sender<Result<Ack, CommandError>> },
    Log { reply: oneshot::Sender<Vec<LoggedCommand>> },
}

/// Shared between the simulation thread and request handlers.
pub struct Hub {
    scenario: Scenario,
    latest: RwLock<Arc<StateDoc>>,
    events: broadcast::Sender<Event>,
    requests: Mutex<mpsc::Sender<Request>>,
    stop: AtomicBool,
}

#[derive(Debug)]
pub struct SessionClosed;

impl Hub {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn latest(&self) -> Arc<StateDoc> {
        self.latest.read().expect("state lock").clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Event> {
        self.events.subscribe()
    }

    /// Open event subscriptions.
    pub fn subscribers(&self) -> usize {
        self.events.receiver_count()
    }

    /// Queues a command for the simulation thread and waits for its verdict.
    pub async fn submit(&self, command: Command) -> Result<Result<Ack, CommandError>, SessionClosed> {
        let (reply, answer) = oneshot::channel();
        self.send(Request::Command { command, reply })?;
        answer.await.map_err(|_| SessionClosed)
    }

    /// World commands accepted so far, with the ticks they apply at.
    pub async fn command_log(&self) -> Option<Vec<LoggedCommand>> {
        let (reply, answer) = oneshot::channel();
        self.send(Request::Log { reply }).ok()?;
        answer.await.ok()
    }

    fn send(&self, req: Request) -> Result<(), SessionClosed> {
        self.requests.lock().expect("request lock").send(req).map_err(|_| SessionClosed)
    }

    fn publish(&self, doc: StateDoc) {
        let doc = Arc::new(doc);
        *self.latest.write().expect("state lock") = doc.clone();
        // no subscribers is fine
        let _ = self.events.send(Event::Tick(doc));
    }

    fn set_paused(&self, paused: bool) {
        let mut latest = self.latest.write().expect("state lock");
        if latest.paused != paused {
            let mut doc = (**latest).clone();
            doc.paused = paused;
            *latest = Arc::new(doc);
        }
    }
}

/// What a finished session leaves behind.
#[derive(Debug, Clone)]
pub struct SessionEnd {
    pub ticks: u64,
    pub command_log: Vec<LoggedCommand>,
    pub error: Option<String>,
}

/// A running simulation thread.
pub struct Session {
    hub: Arc<Hub>,
    worker: Option<JoinHandle<io::Result<SessionEnd>>>,
}

impl Session {
    pub fn start(scenario: Scenario, options: SessionOptions) -> io::Result<Session> {
        let world = scenario.build().map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        let mut sim = Simulation::new(world);
        if options.start_paused {
            sim.enqueue_command(Command::Pause).expect("pause is always accepted");
        }
        let trace = match options.trace {
            Some(out) => Some(TraceWriter::new(out, &scenario, options.snapshot_every, sim.world().state())?),
            None => None,
        };
        let (tx, rx) = mpsc::channel();
        let (events, _) = broadcast::channel(1024);
        let hub = Arc::new(Hub {
            latest: RwLock::new(Arc::new(StateDoc { snapshot: sim.world().snapshot(), paused: sim.paused() })),
            scenario,
            events,
            requests: Mutex::new(tx),
            stop: AtomicBool::new(false),
        });
        let worker_hub = hub.clone();
        let period = options.ticks_per_second.map(|tps| Duration::from_secs_f64(1.0 / tps));
        let heartbeat = options.heartbeat;
        let worker = thread::Builder::new()
            .name("rdsim-sim".into())
            .spawn(move || run_loop(&worker_hub, sim, rx, trace, period, heartbeat))?;
        Ok(Session { hub, worker: Some(worker) })
    }

    pub fn hub(&self) -> Arc<Hub> {
        self.hub.clone()
    }

    /// Stops the simulation thread, finishing the trace.
    pub fn shutdown(mut self) -> io::Result<SessionEnd> {
        self.stop_worker()
    }

    fn stop_worker(&mut self) -> io::Result<SessionEnd> {
        self.hub.stop.store(true, Ordering::SeqCst);
        match self.worker.take() {
            Some(w) => w.join().map_err(|_| io::Error::other("simulation thread panicked"))?,
            None => Err(io::Error::other("session already stopped")),
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if self.worker.is_some() {
            let _ = self.stop_worker();
        }
    }
}

fn run_loop(
    hub: &Hub,
    mut sim: Simulation,
    requests: mpsc::Receiver<Request>,
    mut trace: Option<TraceWriter<Sink>>,
    period: Option<Duration>,
    heartbeat: Duration,
) -> io::Result<SessionEnd> {
    let mut next_tick = Instant::now();
    let mut last_beat = Instant::now();
    let mut error = None;
    while !hub.stop.load(Ordering::SeqCst) {
        // Commands only ever land between ticks.
        while let Ok(req) = requests.try_recv() {
            handle(hub, &mut sim, req);
        }
        if !sim.can_advance() {
            match requests.recv_timeout(heartbeat.min(Duration::from_millis(50))) {
                Ok(req) => handle(hub, &mut sim, req),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
            if last_beat.elapsed() >= heartbeat {
                last_beat = Instant::now();
                let _ = hub.events.send(Event::Heartbeat { tick: sim.world().tick_count() });
            }
            next_tick = Instant::now();
            continue;
        }
        if let Some(p) = period {
            let now = Instant::now();
            if now < next_tick {
                match requests.recv_timeout(next_tick - now) {
                    Ok(req) => handle(hub, &mut sim, req),
                    Err(RecvTimeoutError::Timeout) => {}
                    Err(RecvTimeoutError::Disconnected) => break,
                }
                continue;
            }
            next_tick = if now > next_tick + p { now + p } else { next_tick + p };
        }
        match sim.advance() {
            Ok(Some(report)) => {
                let state = sim.world().state();
                if let Some(w) = trace.as_mut() {
                    w.tick(&report, state)?;
                }
                hub.publish(StateDoc { snapshot: state.snapshot(), paused: sim.paused() });
                last_beat = Instant::now();
            }
            Ok(None) => {}
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    if let Some(w) = trace {
        w.finish(sim.world().state())?;
    }
    Ok(SessionEnd { ticks: sim.world().tick_count(), command_log: sim.command_log().to_vec(), error })
}

fn handle(hub: &Hub, sim: &mut Simulation, req: Request) {
    match req {
        Request::Command { command, reply } => {
            let result = sim.enqueue_command(command);
            hub.set_paused(sim.paused());
            let _ = reply.send(result);
        }
        Request::Log { reply } => {
            let _ = reply.send(sim.command_log().to_vec());
        }
    }
}
