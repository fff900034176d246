//! Client and server of the blind computation protocol.
//!
//! The client hides each computational angle behind a random pre-rotation
//! `θ` carried by the qubit it sends and a random bit `r`:
//! `δ = φ' + θ + rπ`. The server measures at `δ` and reports `s`; the client
//! decodes `s ⊕ r` and uses the decoded outcomes for the flow corrections of
//! later angles, so an honest run reproduces the unblinded pattern exactly.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::linalg::{basis_projector, kron, ComplexMatrix, DensityMatrix};
use crate::mbqc::{enumerate_branches, BrickworkPattern, MbqcRunResult, Position};
use crate::qsim::{plus_state, pure_to_density, PureState};
use crate::rbsp::{run_rbsp, RbspParams};
use crate::seed::{rng_from_seed, SimRng};
use crate::{Angle8, Error, Result, C64};

/// Dimension of the classical register holding an angle.
pub const ANGLE_REGISTER_DIM: usize = 8;

/// `δ = φ' + θ + rπ`.
pub fn blind_angle(phi_prime: Angle8, theta: Angle8, r: bool) -> Angle8 {
    (phi_prime + theta).flip_if(r)
}

/// The client's one-time-pad decoding `s ⊕ r`.
pub fn decode_outcome(s: bool, r: bool) -> bool {
    s ^ r
}

/// Everything the client keeps private, indexed by measurement order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientSecret {
    pub phi: Vec<Angle8>,
    pub theta: Vec<Angle8>,
    pub r: Vec<bool>,
}

impl ClientSecret {
    /// Uniform `θ` and `r` for every position of `pattern`.
    pub fn random(pattern: &BrickworkPattern, rng: &mut impl Rng) -> Self {
        let size = pattern.size();
        let theta = (0..size).map(|_| Angle8::new(rng.random_range(0..8))).collect();
        let r = (0..size).map(|_| rng.random::<bool>()).collect();
        ClientSecret {
            phi: pattern.phi().to_vec(),
            theta,
            r,
        }
    }
}

/// How the server answers after measuring. Only [`HonestServer`] is used for
/// correctness claims; the others exercise blindness against arbitrary
/// reporting.
pub trait ServerBehavior {
    /// Outcome reported for the qubit at measurement index `index`, given the
    /// outcome the server actually obtained.
    fn report(&mut self, index: usize, measured: bool) -> bool;

    fn name(&self) -> &'static str;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HonestServer;

impl ServerBehavior for HonestServer {
    fn report(&mut self, _index: usize, measured: bool) -> bool {
        measured
    }

    fn name(&self) -> &'static str {
        "honest"
    }
}

/// Always reports the same bit.
#[derive(Clone, Copy, Debug)]
pub struct FixedReport(pub bool);

impl ServerBehavior for FixedReport {
    fn report(&mut self, _index: usize, _measured: bool) -> bool {
        self.0
    }

    fn name(&self) -> &'static str {
        if self.0 {
            "all_ones"
        } else {
            "all_zeros"
        }
    }
}

/// Reports independent fair coin flips.
#[derive(Clone, Debug)]
pub struct RandomReport(pub SimRng);

impl RandomReport {
    pub fn from_seed(seed: u64) -> Self {
        RandomReport(rng_from_seed(seed))
    }
}

impl ServerBehavior for RandomReport {
    fn report(&mut self, _index: usize, _measured: bool) -> bool {
        self.0.random()
    }

    fn name(&self) -> &'static str {
        "random"
    }
}

/// How the client's qubits reach the server.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    /// The client sends `|+_θ>` directly.
    Ideal,
    /// One remote preparation from weak coherent pulses per qubit.
    Rbsp(RbspParams),
}

/// One protocol message or client-side record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    /// Qubit sent for `position`; `theta` is client-private.
    Prepare {
        position: Position,
        theta: Angle8,
    },
    /// Photon numbers declared by the server during a remote preparation.
    Declare {
        position: Position,
        counts: Vec<u64>,
    },
    /// Parities reported at the end of a remote preparation.
    PrepParities {
        position: Position,
        t: Vec<bool>,
    },
    /// Preparation of `position` was aborted by the vacuum test.
    Abort {
        position: Position,
    },
    Delta {
        position: Position,
        delta: Angle8,
    },
    Outcome {
        position: Position,
        s: bool,
    },
    /// Client's decoded output for a last-column position.
    Output {
        position: Position,
        bit: bool,
    },
}

/// JSON-lines record: `{"kind": ..., "position": [x, y], "payload": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventLine {
    pub kind: String,
    pub position: [usize; 2],
    pub payload: Value,
}

fn bits(v: &[bool]) -> Vec<u8> {
    v.iter().map(|&b| u8::from(b)).collect()
}

impl Event {
    pub fn position(&self) -> Position {
        match self {
            Event::Prepare { position, .. }
            | Event::Declare { position, .. }
            | Event::PrepParities { position, .. }
            | Event::Abort { position }
            | Event::Delta { position, .. }
            | Event::Outcome { position, .. }
            | Event::Output { position, .. } => *position,
        }
    }

    pub fn to_line(&self) -> EventLine {
        let (kind, payload) = match self {
            Event::Prepare { theta, .. } => ("prepare", json!({ "theta": theta.index() })),
            Event::Declare { counts, .. } => ("declare", json!({ "counts": counts })),
            Event::PrepParities { t, .. } => ("prep_parities", json!({ "t": bits(t) })),
            Event::Abort { .. } => ("abort", json!({})),
            Event::Delta { delta, .. } => ("delta", json!({ "delta": delta.index() })),
            Event::Outcome { s, .. } => ("outcome", json!({ "s": u8::from(*s) })),
            Event::Output { bit, .. } => ("output", json!({ "bit": u8::from(*bit) })),
        };
        let p = self.position();
        EventLine {
            kind: kind.to_string(),
            position: [p.x, p.y],
            payload,
        }
    }

    pub fn from_line(line: &EventLine) -> Result<Event> {
        let position = Position::new(line.position[0], line.position[1]);
        let field = |name: &str| {
            line.payload
                .get(name)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("{} event lacks `{name}`", line.kind)))
        };
        let parse = |v: Value| -> Result<Value> { Ok(v) };
        let as_u64 = |v: Value| {
            v.as_u64()
                .ok_or_else(|| Error::InvalidParameter(format!("bad payload in {} event", line.kind)))
        };
        let as_bits = |v: Value| -> Result<Vec<bool>> {
            v.as_array()
                .ok_or_else(|| Error::InvalidParameter("expected a bit array".into()))?
                .iter()
                .map(|b| match b.as_u64() {
                    Some(0) => Ok(false),
                    Some(1) => Ok(true),
                    _ => Err(Error::InvalidParameter("expected 0 or 1".into())),
                })
                .collect()
        };
        Ok(match line.kind.as_str() {
            "prepare" => Event::Prepare {
                position,
                theta: Angle8::new(as_u64(field("theta")?)? as i64),
            },
            "declare" => Event::Declare {
                position,
                counts: serde_json::from_value(parse(field("counts")?)?)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
            },
            "prep_parities" => Event::PrepParities {
                position,
                t: as_bits(field("t")?)?,
            },
            "abort" => Event::Abort { position },
            "delta" => Event::Delta {
                position,
                delta: Angle8::new(as_u64(field("delta")?)? as i64),
            },
            "outcome" => Event::Outcome {
                position,
                s: as_u64(field("s")?)? == 1,
            },
            "output" => Event::Output {
                position,
                bit: as_u64(field("bit")?)? == 1,
            },
            other => return Err(Error::InvalidParameter(format!("unknown event kind `{other}`"))),
        })
    }
}

/// Ordered record of one protocol run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn aborted(&self) -> bool {
        self.events.iter().any(|e| matches!(e, Event::Abort { .. }))
    }

    pub fn deltas(&self) -> Vec<Angle8> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Delta { delta, .. } => Some(*delta),
                _ => None,
            })
            .collect()
    }

    pub fn outputs(&self) -> Vec<bool> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Output { bit, .. } => Some(*bit),
                _ => None,
            })
            .collect()
    }

    /// The transcript without client-private records.
    pub fn server_view(&self) -> Transcript {
        Transcript {
            events: self
                .events
                .iter()
                .filter(|e| !matches!(e, Event::Prepare { .. } | Event::Output { .. }))
                .cloned()
                .collect(),
        }
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(&e.to_line()).expect("event lines serialise"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Transcript> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let line: EventLine = serde_json::from_str(l).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Event::from_line(&line)
            })
            .collect::<Result<_>>()?;
        Ok(Transcript { events })
    }

    /// Checks protocol ordering: all preparation precedes the first `δ`, each
    /// `δ` is immediately answered by its outcome, `δ`s follow `order`, and
    /// outputs come last.
    pub fn validate(&self, order: &[Position]) -> Result<()> {
        let bad = |msg: String| Err(Error::Consistency(msg));
        let mut phase = 0; // 0 preparation, 1 interaction, 2 outputs
        let mut expected = order.iter();
        let mut pending: Option<Position> = None;
        for e in &self.events {
            match e {
                Event::Prepare { .. } | Event::Declare { .. } | Event::PrepParities { .. } | Event::Abort { .. } => {
                    if phase != 0 {
                        return bad(format!("preparation event after interaction began: {e:?}"));
                    }
                }
                Event::Delta { position, .. } => {
                    if phase > 1 || pending.is_some() {
                        return bad(format!("unexpected delta at {position}"));
                    }
                    phase = 1;
                    if expected.next() != Some(position) {
                        return bad(format!("delta at {position} out of measurement order"));
                    }
                    pending = Some(*position);
                }
                Event::Outcome { position, .. } => {
                    if pending != Some(*position) {
                        return bad(format!("outcome at {position} without its delta"));
                    }
                    pending = None;
                }
                Event::Output { .. } => {
                    if pending.is_some() {
                        return bad("output before the last outcome".into());
                    }
                    phase = 2;
                }
            }
        }
        Ok(())
    }
}

/// Result of one blind run.
#[derive(Clone, Debug, PartialEq)]
pub struct UbqcRun {
    pub transcript: Transcript,
    pub secret: ClientSecret,
    /// Decoded outcomes and outputs; `None` when a preparation aborted.
    pub result: Option<MbqcRunResult>,
}

impl UbqcRun {
    pub fn aborted(&self) -> bool {
        self.result.is_none()
    }
}

/// Runs the protocol end to end. All client randomness, preparation
/// randomness and measurement branches derive from `seed`.
pub fn run_ubqc(
    pattern: &BrickworkPattern,
    server: &mut dyn ServerBehavior,
    preparation: &Preparation,
    seed: u64,
) -> Result<UbqcRun> {
    let mut rng = rng_from_seed(seed);
    let size = pattern.size();
    let mut transcript = Transcript::default();
    let mut secret = ClientSecret::random(pattern, &mut rng);

    // Preparation: one qubit per position, in measurement order.
    let mut qubits: Vec<PureState> = Vec::with_capacity(size);
    for (index, &position) in pattern.order().iter().enumerate() {
        match preparation {
            Preparation::Ideal => {
                qubits.push(plus_state(secret.theta[index]));
                transcript.push(Event::Prepare {
                    position,
                    theta: secret.theta[index],
                });
            }
            Preparation::Rbsp(params) => {
                let out = run_rbsp(params, &mut rng)?;
                transcript.push(Event::Declare {
                    position,
                    counts: out.pulses.iter().map(|p| p.declared_count).collect(),
                });
                if out.aborted {
                    transcript.push(Event::Abort { position });
                    return Ok(UbqcRun {
                        transcript,
                        secret,
                        result: None,
                    });
                }
                let theta = out.theta_client.expect("not aborted");
                secret.theta[index] = theta;
                transcript.push(Event::PrepParities {
                    position,
                    t: out.t_bits.clone(),
                });
                transcript.push(Event::Prepare { position, theta });
                qubits.push(out.server_qubit.expect("not aborted"));
            }
        }
    }

    // Server: entangle.
    let mut state = PureState::empty();
    for q in &qubits {
        state = state.tensor(q)?;
    }
    for (a, b) in pattern.index_edges() {
        state = state.apply_cz(a, b)?;
    }

    // Interaction.
    let mut live: Vec<usize> = (0..size).collect();
    let mut reported = Vec::with_capacity(size);
    let mut decoded = Vec::with_capacity(size);
    for (index, &position) in pattern.order().iter().enumerate() {
        let phi_prime = pattern.adapted_angle(index, &decoded);
        let delta = blind_angle(phi_prime, secret.theta[index], secret.r[index]);
        transcript.push(Event::Delta { position, delta });
        let slot = live.iter().position(|&l| l == index).expect("qubit is live");
        let m = state.measure_rotated(slot, delta, rng.random::<f64>())?;
        state = m.post_state;
        live.remove(slot);
        let s = server.report(index, m.bit);
        transcript.push(Event::Outcome { position, s });
        reported.push(s);
        decoded.push(decode_outcome(s, secret.r[index]));
    }

    let corrected_outputs = decoded[pattern.output_indices()].to_vec();
    for (k, index) in pattern.output_indices().enumerate() {
        transcript.push(Event::Output {
            position: pattern.order()[index],
            bit: corrected_outputs[k],
        });
    }
    Ok(UbqcRun {
        transcript,
        secret,
        result: Some(MbqcRunResult {
            outcomes: decoded,
            corrected_outputs,
            final_state: state,
        }),
    })
}

/// Exact distribution of the decoded outputs of an honest run with ideal
/// preparation for fixed `θ` and `r`, over all measurement branches.
pub fn blind_output_distribution(
    pattern: &BrickworkPattern,
    theta: &[Angle8],
    r: &[bool],
) -> Result<BTreeMap<Vec<bool>, f64>> {
    let state = pattern.resource_state(Some(theta))?;
    let decode = |raw: &[bool]| -> Vec<bool> { raw.iter().zip(r).map(|(&s, &ri)| s ^ ri).collect() };
    let leaves = enumerate_branches(&state, |i, raw| {
        let phi_prime = pattern.adapted_angle(i, &decode(raw));
        blind_angle(phi_prime, theta[i], r[i])
    })?;
    let mut dist = BTreeMap::new();
    for leaf in leaves {
        let outputs = decode(&leaf.outcomes)[pattern.output_indices()].to_vec();
        *dist.entry(outputs).or_insert(0.0) += leaf.probability;
    }
    Ok(dist)
}

/// Deterministic or coin-flip reporting rules for exact enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportingRule {
    Honest,
    Constant(bool),
    Inverted,
    /// Fair coin independent of everything.
    Uniform,
}

/// Exact distribution of the client's `δ` sequence over uniform `θ`, `r`,
/// measurement branches and the server's reporting rule (ideal preparation).
pub fn delta_message_distribution(
    pattern: &BrickworkPattern,
    rule: ReportingRule,
) -> Result<BTreeMap<Vec<Angle8>, f64>> {
    let size = pattern.size();
    if size > 3 {
        return Err(Error::InvalidParameter("exact δ enumeration limited to S <= 3".into()));
    }
    let mut dist = BTreeMap::new();
    let n_theta = 8usize.pow(size as u32);
    let weight = 1.0 / (n_theta as f64 * (1u64 << size) as f64);
    for t_code in 0..n_theta {
        let theta: Vec<Angle8> = (0..size)
            .map(|i| Angle8::new(((t_code / 8usize.pow(i as u32)) % 8) as i64))
            .collect();
        let state = pattern.resource_state(Some(&theta))?;
        for r_code in 0..(1usize << size) {
            let r: Vec<bool> = (0..size).map(|i| (r_code >> i) & 1 == 1).collect();
            // (state, deltas, reported, probability)
            let mut stack = vec![(state.clone(), Vec::<Angle8>::new(), Vec::<bool>::new(), weight)];
            while let Some((st, deltas, reported, prob)) = stack.pop() {
                let i = deltas.len();
                if i == size {
                    *dist.entry(deltas).or_insert(0.0) += prob;
                    continue;
                }
                let decoded: Vec<bool> = reported.iter().zip(&r).map(|(&s, &ri)| s ^ ri).collect();
                let delta = blind_angle(pattern.adapted_angle(i, &decoded), theta[i], r[i]);
                for measured in [false, true] {
                    let (p, post) = st.project(0, delta, measured)?;
                    let Some(post) = post else { continue };
                    let reports: Vec<(bool, f64)> = match rule {
                        ReportingRule::Honest => vec![(measured, 1.0)],
                        ReportingRule::Constant(b) => vec![(b, 1.0)],
                        ReportingRule::Inverted => vec![(!measured, 1.0)],
                        ReportingRule::Uniform => vec![(false, 0.5), (true, 0.5)],
                    };
                    for (s, q) in reports {
                        let mut d = deltas.clone();
                        d.push(delta);
                        let mut rep = reported.clone();
                        rep.push(s);
                        stack.push((post.clone(), d, rep, prob * p * q));
                    }
                }
            }
        }
    }
    Ok(dist)
}

/// Server's state for a single position with computational angle `phi`:
/// `(1/16) Σ_{θ,r} |+_θ><+_θ| ⊗ |δ><δ|`, qubit first, `δ` in an
/// 8-dimensional classical register.
pub fn server_view_state(phi: Angle8) -> DensityMatrix {
    let dim = 2 * ANGLE_REGISTER_DIM;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for theta in Angle8::all() {
        for r in [false, true] {
            let delta = blind_angle(phi, theta, r);
            let qubit = pure_to_density(&plus_state(theta));
            let reg = basis_projector(ANGLE_REGISTER_DIM, delta.index() as usize);
            acc += kron(qubit.matrix(), &reg) * C64::new(1.0 / 16.0, 0.0);
        }
    }
    DensityMatrix::new_unchecked(acc)
}
