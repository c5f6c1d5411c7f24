//! Live duel service: one human plays the enemy over a WebSocket while
//! matches run back to back in real time.
//!
//! The tick loop never waits on the network. State frames go into a small
//! per-connection queue that drops its oldest state frame when full; a
//! session thread drains the queue and reads input with a short timeout.

use std::collections::VecDeque;
use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::Duration;

use log::{info, warn};
use thiserror::Error;
use tungstenite::{Message, WebSocket};

use qsmodels_core::arena::{ArenaRules, WorldState};
use qsmodels_core::executive::{Executive, Outcome};

use crate::config::{ConfigError, EnemyKind, MatchConfig, TimeMode};
use crate::enemy::{scripted, EnemyController, Human, HumanInput};
use crate::protocol::{config_frame, state_frame, ClientFrame, ServerFrame};
use crate::run::{
    executive_config, load_spec, make_planner, run_match_with, MatchRun, RunError, TickFrame,
    TickObserver,
};

/// Frames buffered per connection before old state frames are dropped.
pub const OUTBOX_CAPACITY: usize = 32;

const READ_POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Debug, Default)]
struct OutboxState {
    frames: VecDeque<(bool, String)>,
    closed: bool,
    dropped: u64,
}

/// Bounded outbound queue. Only state frames are ever dropped.
#[derive(Debug, Default)]
pub struct Outbox {
    state: Mutex<OutboxState>,
    ready: Condvar,
}

impl Outbox {
    pub fn push(&self, frame: &ServerFrame) {
        let is_state = matches!(frame, ServerFrame::State { .. });
        self.push_text(
            is_state,
            serde_json::to_string(frame).expect("frames serialize"),
        );
    }

    /// Queues serialized text; `is_state` marks it as droppable.
    pub fn push_text(&self, is_state: bool, text: String) {
        let mut s = lock(&self.state);
        if s.closed {
            return;
        }
        if s.frames.len() >= OUTBOX_CAPACITY {
            if let Some(pos) = s.frames.iter().position(|(st, _)| *st) {
                s.frames.remove(pos);
                s.dropped += 1;
            }
        }
        s.frames.push_back((is_state, text));
        self.ready.notify_one();
    }

    /// Takes everything queued, waiting up to `wait` if the queue is empty.
    pub fn drain(&self, wait: Duration) -> Vec<String> {
        let mut s = lock(&self.state);
        if s.frames.is_empty() && !s.closed {
            s = self
                .ready
                .wait_timeout(s, wait)
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
        s.frames.drain(..).map(|(_, t)| t).collect()
    }

    pub fn close(&self) {
        lock(&self.state).closed = true;
        self.ready.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        lock(&self.state).closed
    }

    pub fn len(&self) -> usize {
        lock(&self.state).frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dropped(&self) -> u64 {
        lock(&self.state).dropped
    }
}

/// State shared between the tick loop, the acceptor and the session.
#[derive(Debug, Default)]
struct Hub {
    input: Arc<Mutex<HumanInput>>,
    session: Mutex<Option<(u64, Arc<Outbox>)>>,
    config: Mutex<Option<ServerFrame>>,
    next_id: AtomicU64,
}

impl Hub {
    fn broadcast(&self, frame: &ServerFrame) {
        if let Some((_, out)) = lock(&self.session).as_ref() {
            out.push(frame);
        }
    }

    fn end_session(&self, id: u64) {
        let mut session = lock(&self.session);
        if session.as_ref().is_some_and(|(sid, _)| *sid == id) {
            if let Some((_, out)) = session.take() {
                out.close();
            }
            let mut input = lock(&self.input);
            input.connected = false;
            input.keys = None;
        }
    }
}

pub struct DuelServer {
    listener: TcpListener,
    hub: Arc<Hub>,
}

impl DuelServer {
    pub fn bind(addr: &str) -> Result<Self, ServeError> {
        let listener = TcpListener::bind(addr).map_err(|source| ServeError::Bind {
            addr: addr.to_owned(),
            source,
        })?;
        let server = DuelServer {
            listener,
            hub: Arc::new(Hub::default()),
        };
        server.spawn_acceptor()?;
        Ok(server)
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener")
    }

    fn spawn_acceptor(&self) -> Result<(), ServeError> {
        let listener = self
            .listener
            .try_clone()
            .map_err(|source| ServeError::Bind {
                addr: self
                    .listener
                    .local_addr()
                    .map(|a| a.to_string())
                    .unwrap_or_default(),
                source,
            })?;
        let hub = self.hub.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                match stream {
                    Ok(stream) => accept(&hub, stream),
                    Err(e) => warn!("accept failed: {e}"),
                }
            }
        });
        Ok(())
    }

    /// Whether a human is currently connected.
    pub fn has_player(&self) -> bool {
        lock(&self.hub.session).is_some()
    }

    /// Plays `matches` matches (forever when `None`) in real time.
    pub fn run(
        &self,
        config: &MatchConfig,
        matches: Option<usize>,
    ) -> Result<Vec<MatchRun>, ServeError> {
        let mut config = config.clone();
        config.time_mode = TimeMode::Realtime;
        config.validate()?;
        let spec = load_spec(&config)?;
        let backend = config.backend()?;
        let mut runs = Vec::new();
        let mut n = 0;
        while matches.is_none_or(|m| n < m) {
            let seed = config.seed.wrapping_add(n as u64);
            let world = WorldState::new(&spec, ArenaRules::default(), seed);
            let enemy: Box<dyn EnemyController> = match config.enemy {
                EnemyKind::Human => Box::new(Human::new(self.hub.input.clone())),
                kind => scripted(kind, &world).ok_or_else(|| {
                    ConfigError::Invalid(format!("enemy `{kind}` has no patrol start"))
                })?,
            };
            let frame = config_frame(&world, config.tick_ms);
            *lock(&self.hub.config) = Some(frame.clone());
            self.hub.broadcast(&frame);
            let exec = Executive::new(
                executive_config(&config),
                world.arena.clone(),
                make_planner(&config, backend.clone()),
            );
            let mut observer = Broadcaster { hub: &self.hub };
            let run = run_match_with(&config, world, exec, enemy, &mut observer)?;
            info!(
                "match {n} over: {:?} after {} ticks",
                run.report.outcome, run.report.ticks
            );
            if matches.is_some() {
                runs.push(run);
            }
            n += 1;
        }
        Ok(runs)
    }
}

struct Broadcaster<'a> {
    hub: &'a Hub,
}

impl TickObserver for Broadcaster<'_> {
    fn on_tick(&mut self, frame: &TickFrame<'_>) {
        self.hub
            .broadcast(&state_frame(frame.world, frame.executive));
    }

    fn on_end(&mut self, outcome: Outcome, _tick: u64) {
        self.hub.broadcast(&ServerFrame::End { outcome });
    }
}

fn send(ws: &mut WebSocket<TcpStream>, text: String) -> tungstenite::Result<()> {
    ws.send(Message::text(text))
}

fn reject(mut ws: WebSocket<TcpStream>, message: &str) {
    let frame = ServerFrame::Error {
        message: message.to_owned(),
    };
    let _ = send(
        &mut ws,
        serde_json::to_string(&frame).expect("frames serialize"),
    );
    let _ = ws.close(None);
    let _ = ws.flush();
}

fn accept(hub: &Arc<Hub>, stream: TcpStream) {
    let peer = stream.peer_addr().ok();
    let ws = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            warn!("handshake with {peer:?} failed: {e}");
            return;
        }
    };
    let outbox = Arc::new(Outbox::default());
    let id = hub.next_id.fetch_add(1, Ordering::Relaxed);
    {
        let mut session = lock(&hub.session);
        if session.is_some() {
            drop(session);
            info!("rejecting {peer:?}: a player is already connected");
            reject(ws, "a player is already connected");
            return;
        }
        if let Some(cfg) = lock(&hub.config).as_ref() {
            outbox.push(cfg);
        }
        *session = Some((id, outbox.clone()));
        let mut input = lock(&hub.input);
        input.connected = true;
        input.keys = None;
    }
    info!("player connected from {peer:?}");
    let hub = hub.clone();
    thread::spawn(move || {
        session_loop(&hub, ws, &outbox);
        hub.end_session(id);
        info!("player {peer:?} left");
    });
}

fn session_loop(hub: &Hub, mut ws: WebSocket<TcpStream>, outbox: &Outbox) {
    if ws.get_ref().set_read_timeout(Some(READ_POLL)).is_err() {
        return;
    }
    loop {
        if outbox.is_closed() {
            let _ = ws.close(None);
            let _ = ws.flush();
            return;
        }
        for text in outbox.drain(READ_POLL) {
            if send(&mut ws, text).is_err() {
                return;
            }
        }
        match ws.read() {
            Ok(Message::Text(text)) => match serde_json::from_str::<ClientFrame>(text.as_str()) {
                Ok(ClientFrame::Input { keys }) => lock(&hub.input).keys = Some(keys),
                Err(e) => {
                    warn!("malformed input frame: {e}");
                    reject(ws, &format!("malformed frame: {e}"));
                    return;
                }
            },
            Ok(Message::Binary(_)) => {
                reject(ws, "binary frames are not part of the protocol");
                return;
            }
            Ok(Message::Close(_)) => {
                let _ = ws.flush();
                return;
            }
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => return,
        }
    }
}
