//! Adapter for plants running in an external process, speaking a
//! newline-delimited JSON protocol over the child's standard streams.
//!
//! Handshake: `{"op":"init"}` -> `{"n":..,"m":..,"control_sets":[[..],..]}`.
//! Step: `{"op":"step","x":[..],"u":[..],"seed_draw":<nat>}` ->
//! `{"x_next":[..]}`. The `seed_draw` gives the child deterministic entropy
//! for its per-step noise.
//!
//! The protocol has no initial-state operation, so the adapter samples
//! initial states uniformly from a configured box.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::logic::ControlSpace;

use super::{Plant, PlantError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Init,
    Step {
        x: Vec<f64>,
        u: Vec<f64>,
        seed_draw: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitReply {
    pub n: usize,
    pub m: usize,
    pub control_sets: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepReply {
    pub x_next: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPlantConfig {
    /// Program and arguments of the child process.
    pub command: Vec<String>,
    /// Initial-state box, sampled uniformly per dimension.
    pub init_lo: Vec<f64>,
    pub init_hi: Vec<f64>,
    /// Reply timeout in milliseconds.
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    10_000
}

/// A plant served by a child process. Owns the child exclusively; the
/// process is killed on drop.
pub struct ExternalPlant {
    child: Child,
    stdin: std::process::ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    n: usize,
    m: usize,
    space: ControlSpace,
    init_lo: Vec<f64>,
    init_hi: Vec<f64>,
}

impl ExternalPlant {
    /// Spawns the child and performs the init handshake.
    pub fn spawn(cfg: &ExternalPlantConfig) -> Result<Self, PlantError> {
        let (program, args) = cfg
            .command
            .split_first()
            .ok_or_else(|| PlantError::BadConfig("external plant command is empty".into()))?;
        if cfg.init_lo.len() != cfg.init_hi.len() {
            return Err(PlantError::BadConfig(
                "init_lo and init_hi lengths differ".into(),
            ));
        }
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        // A reader thread feeds lines through a channel so replies can be
        // awaited with a timeout.
        let (tx, rx) = channel();
        thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut plant = ExternalPlant {
            child,
            stdin,
            lines: rx,
            timeout: Duration::from_millis(cfg.timeout_ms),
            n: 0,
            m: 0,
            space: ControlSpace::new(vec![vec![0.0]]).expect("placeholder"),
            init_lo: cfg.init_lo.clone(),
            init_hi: cfg.init_hi.clone(),
        };
        let reply: InitReply = plant.roundtrip(&Request::Init)?;
        if reply.control_sets.len() != reply.m {
            return Err(PlantError::MalformedReply(format!(
                "{} control sets for m = {}",
                reply.control_sets.len(),
                reply.m
            )));
        }
        plant.n = reply.n;
        plant.m = reply.m;
        plant.space = ControlSpace::new(reply.control_sets)?;
        if plant.init_lo.len() != plant.n {
            return Err(PlantError::BadConfig(format!(
                "initial-state box has dimension {}, plant reports n = {}",
                plant.init_lo.len(),
                plant.n
            )));
        }
        Ok(plant)
    }

    fn roundtrip<R: for<'de> Deserialize<'de>>(
        &mut self,
        request: &Request,
    ) -> Result<R, PlantError> {
        let mut line = serde_json::to_string(request).expect("requests serialize");
        line.push('\n');
        self.stdin.write_all(line.as_bytes()).map_err(|_| {
            // A write failure on a closed pipe means the child is gone.
            PlantError::ProcessExited
        })?;
        self.stdin.flush().map_err(|_| PlantError::ProcessExited)?;
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => serde_json::from_str(&reply)
                .map_err(|e| PlantError::MalformedReply(format!("{e}: {reply}"))),
            Ok(Err(e)) => Err(PlantError::Io(e)),
            Err(RecvTimeoutError::Disconnected) => Err(PlantError::ProcessExited),
            Err(RecvTimeoutError::Timeout) => Err(PlantError::Timeout(self.timeout)),
        }
    }
}

impl Drop for ExternalPlant {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Plant for ExternalPlant {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn control_dim(&self) -> usize {
        self.m
    }

    fn control_space(&self) -> ControlSpace {
        self.space.clone()
    }

    fn initial_state(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PlantError> {
        Ok(self
            .init_lo
            .iter()
            .zip(&self.init_hi)
            .map(|(&lo, &hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
            .collect())
    }

    fn step(
        &mut self,
        x: &[f64],
        u: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, PlantError> {
        if x.len() != self.n {
            return Err(PlantError::StateDim {
                expected: self.n,
                found: x.len(),
            });
        }
        if u.len() != self.m {
            return Err(PlantError::ControlDim {
                expected: self.m,
                found: u.len(),
            });
        }
        let reply: StepReply = self.roundtrip(&Request::Step {
            x: x.to_vec(),
            u: u.to_vec(),
            seed_draw: u64::from(rng.next_u32()),
        })?;
        if reply.x_next.len() != self.n {
            return Err(PlantError::ReplyDim {
                expected: self.n,
                found: reply.x_next.len(),
            });
        }
        Ok(reply.x_next)
    }
}

/// Serves a plant over the protocol's child side: reads requests line by
/// line, steps the plant with noise derived from each request's
/// `seed_draw`, and writes replies. Returns when the input stream ends.
pub fn serve_plant(
    plant: &mut dyn Plant,
    input: impl BufRead,
    mut output: impl Write,
) -> Result<(), PlantError> {
    use rand::SeedableRng;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: Request = serde_json::from_str(&line)
            .map_err(|e| PlantError::MalformedReply(format!("bad request: {e}")))?;
        let reply = match request {
            Request::Init => serde_json::to_string(&InitReply {
                n: plant.state_dim(),
                m: plant.control_dim(),
                control_sets: plant.control_space().sets().to_vec(),
            }),
            Request::Step { x, u, seed_draw } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_draw);
                let x_next = plant.step(&x, &u, &mut rng)?;
                serde_json::to_string(&StepReply { x_next })
            }
        }
        .expect("replies serialize");
        output.write_all(reply.as_bytes())?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
