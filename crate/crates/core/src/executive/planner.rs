//! Asynchronous plan requests.
//!
//! The executive talks to the planner only through [`PlanService`]: it
//! submits an immutable request and polls for the response on later
//! ticks, so a slow solver never stalls a tick.

use std::collections::VecDeque;
use std::panic::{self, AssertUnwindSafe};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Instant;

use crate::encoder::PlanningProblem;
use crate::solver::{plan_with_deepening, Backend, NoPlan, PlanFound};

#[derive(Debug, Clone)]
pub struct PlanRequest {
    /// Strictly increasing per executive.
    pub id: u64,
    pub tick: u64,
    /// Template; the horizon is chosen by iterative deepening.
    pub problem: PlanningProblem,
    pub n_max: usize,
}

#[derive(Debug, Clone)]
pub struct PlanResponse {
    pub id: u64,
    pub result: Result<PlanFound, NoPlan>,
    pub latency_ms: f64,
}

pub trait PlanService: Send {
    fn submit(&mut self, request: PlanRequest);
    /// A finished response, if any is ready by `now_tick`.
    fn poll(&mut self, now_tick: u64) -> Option<PlanResponse>;
}

fn solve(backend: &dyn Backend, req: &PlanRequest) -> Result<PlanFound, NoPlan> {
    panic::catch_unwind(AssertUnwindSafe(|| {
        plan_with_deepening(&req.problem, req.n_max, backend)
    }))
    .unwrap_or_else(|_| {
        Err(NoPlan {
            diagnostic: Some("backend panicked".into()),
            attempts: Vec::new(),
        })
    })
}

/// Simulated-time planner: solves at once but releases the answer only
/// after a latency derived from the work done, so runs are reproducible.
///
/// Each attempted horizon `h` costs `h × ticks_per_step` ticks (at least
/// one tick in total); the reported latency is that many tick periods.
pub struct DeferredPlanner {
    backend: Arc<dyn Backend>,
    tick_ms: u64,
    ticks_per_step: u64,
    queue: VecDeque<(u64, PlanResponse)>,
}

impl DeferredPlanner {
    pub fn new(backend: Arc<dyn Backend>, tick_ms: u64) -> Self {
        DeferredPlanner {
            backend,
            tick_ms,
            ticks_per_step: 1,
            queue: VecDeque::new(),
        }
    }

    pub fn with_ticks_per_step(mut self, n: u64) -> Self {
        self.ticks_per_step = n;
        self
    }
}

impl PlanService for DeferredPlanner {
    fn submit(&mut self, request: PlanRequest) {
        let result = solve(self.backend.as_ref(), &request);
        let attempts = match &result {
            Ok(found) => &found.attempts,
            Err(no) => &no.attempts,
        };
        let work: u64 = attempts.iter().map(|a| a.horizon as u64).sum();
        let ticks = (work * self.ticks_per_step).max(1);
        let response = PlanResponse {
            id: request.id,
            result,
            latency_ms: (ticks * self.tick_ms) as f64,
        };
        self.queue.push_back((request.tick + ticks, response));
    }

    fn poll(&mut self, now_tick: u64) -> Option<PlanResponse> {
        match self.queue.front() {
            Some((due, _)) if *due <= now_tick => self.queue.pop_front().map(|(_, r)| r),
            _ => None,
        }
    }
}

/// Wall-clock planner: one worker thread solves requests in order.
/// Latency is measured from submission to completion.
pub struct ThreadedPlanner {
    requests: Option<Sender<(PlanRequest, Instant)>>,
    responses: Receiver<PlanResponse>,
    worker: Option<JoinHandle<()>>,
}

impl ThreadedPlanner {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        let (req_tx, req_rx) = mpsc::channel::<(PlanRequest, Instant)>();
        let (resp_tx, resp_rx) = mpsc::channel();
        let worker = thread::Builder::new()
            .name("planner".into())
            .spawn(move || {
                for (req, submitted) in req_rx {
                    let result = solve(backend.as_ref(), &req);
                    let response = PlanResponse {
                        id: req.id,
                        result,
                        latency_ms: submitted.elapsed().as_secs_f64() * 1000.0,
                    };
                    if resp_tx.send(response).is_err() {
                        break;
                    }
                }
            })
            .expect("spawn planner thread");
        ThreadedPlanner {
            requests: Some(req_tx),
            responses: resp_rx,
            worker: Some(worker),
        }
    }
}

impl PlanService for ThreadedPlanner {
    fn submit(&mut self, request: PlanRequest) {
        if let Some(tx) = &self.requests {
            let _ = tx.send((request, Instant::now()));
        }
    }

    fn poll(&mut self, _now_tick: u64) -> Option<PlanResponse> {
        self.responses.try_recv().ok()
    }
}

impl Drop for ThreadedPlanner {
    fn drop(&mut self) {
        // Closing the channel ends the worker after its current solve; it
        // is not joined so a long solve cannot hold up shutdown.
        self.requests.take();
        self.worker.take();
    }
}
