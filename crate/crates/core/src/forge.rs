//! Seeded instance generators: Garnet, machine replacement, healthcare, and
//! sample perturbations around a nominal kernel.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Independent
//! draws use separate ChaCha streams (`set_stream`), so adding a sample never
//! shifts the kernel or the costs:
//!
//! | stream | use |
//! |---|---|
//! | 0 | Garnet kernel supports and probabilities |
//! | 1 | Garnet costs |
//! | `16 + i` | perturbation sample `i` |

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::model::{is_distribution, RobustMdp, SIMPLEX_TOL};
use crate::uncertainty::{UncertaintyKind, UncertaintySpec};

const STREAM_KERNEL: u64 = 0;
const STREAM_COSTS: u64 = 1;
const STREAM_SAMPLES: u64 = 16;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn spec_for(kind: UncertaintyKind, radius: f64) -> UncertaintySpec {
    UncertaintySpec { kind, radius }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GarnetParams {
    pub num_states: usize,
    pub num_actions: usize,
    pub n_branch: f64,
    pub cost_low: f64,
    pub cost_high: f64,
    pub discount: f64,
    pub seed: u64,
}

impl Default for GarnetParams {
    fn default() -> Self {
        GarnetParams {
            num_states: 10,
            num_actions: 10,
            n_branch: 0.5,
            cost_low: 0.0,
            cost_high: 10.0,
            discount: 0.8,
            seed: 0,
        }
    }
}

impl GarnetParams {
    pub fn new(num_states: usize, num_actions: usize, seed: u64) -> Self {
        GarnetParams {
            num_states,
            num_actions,
            seed,
            ..Default::default()
        }
    }

    /// `ceil(n_branch * S)`, the support size of every kernel row.
    pub fn branch_count(&self) -> usize {
        (self.n_branch * self.num_states as f64).ceil() as usize
    }

    /// `sqrt(n_branch * A)`.
    pub fn radius(&self) -> f64 {
        (self.n_branch * self.num_actions as f64).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.num_states == 0 || self.num_actions == 0 {
            return Err(RmdpError::Config("Garnet sizes must be positive".into()));
        }
        if !(self.n_branch > 0.0 && self.n_branch <= 1.0) {
            return Err(RmdpError::Config(format!("n_branch {} outside (0, 1]", self.n_branch)));
        }
        if self.n_branch * (self.num_states as f64) < 1.0 {
            return Err(RmdpError::Config(format!(
                "n_branch * S = {} leaves no reachable next state",
                self.n_branch * self.num_states as f64
            )));
        }
        if !(self.cost_low >= 0.0 && self.cost_low <= self.cost_high && self.cost_high.is_finite()) {
            return Err(RmdpError::Config(format!(
                "cost range [{}, {}] must be finite, ordered and non-negative",
                self.cost_low, self.cost_high
            )));
        }
        Ok(())
    }
}

/// Row-stochastic `S x A x S` kernel with `k` uniformly chosen next states per row.
fn garnet_kernel(rng: &mut ChaCha8Rng, ns: usize, na: usize, k: usize) -> Vec<f64> {
    let mut kernel = vec![0.0; ns * na * ns];
    let mut weights = vec![0.0; k];
    for row in kernel.chunks_mut(ns) {
        let support = sample(rng, ns, k);
        // (0, 1] keeps every selected entry strictly positive
        weights.iter_mut().for_each(|w| *w = 1.0 - rng.random::<f64>());
        let total: f64 = weights.iter().sum();
        for (idx, w) in support.iter().zip(&weights) {
            row[idx] = w / total;
        }
    }
    kernel
}

pub fn gen_garnet(params: &GarnetParams, kind: UncertaintyKind) -> Result<RobustMdp> {
    params.validate()?;
    let (ns, na) = (params.num_states, params.num_actions);
    let kernel = garnet_kernel(&mut rng_for(params.seed, STREAM_KERNEL), ns, na, params.branch_count());
    let mut rng = rng_for(params.seed, STREAM_COSTS);
    let costs = (0..ns * na)
        .map(|_| params.cost_low + (params.cost_high - params.cost_low) * rng.random::<f64>())
        .collect();
    RobustMdp::new(
        ns,
        na,
        params.discount,
        costs,
        kernel,
        vec![1.0 / ns as f64; ns],
        spec_for(kind, params.radius()),
    )
}

/// `y_i = 0.95 y0 + 0.05 y~_i` with `y~_i` a Garnet kernel at branching `n_branch`.
pub fn perturb_samples(
    nominal: &[f64],
    num_states: usize,
    num_actions: usize,
    count: usize,
    n_branch: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if nominal.len() != num_states * num_actions * num_states {
        return Err(RmdpError::Dimension(format!(
            "nominal kernel has {} entries, expected {}",
            nominal.len(),
            num_states * num_actions * num_states
        )));
    }
    if let Some(row) = nominal.chunks(num_states).position(|r| !is_distribution(r, SIMPLEX_TOL)) {
        return Err(RmdpError::InvalidInstance(format!("nominal kernel row {row} is not a distribution")));
    }
    let k = ((n_branch * num_states as f64).ceil() as usize).clamp(1, num_states);
    Ok((0..count as u64)
        .map(|i| {
            let noise = garnet_kernel(&mut rng_for(seed, STREAM_SAMPLES + i), num_states, num_actions, k);
            nominal.iter().zip(&noise).map(|(y0, yt)| 0.95 * y0 + 0.05 * yt).collect()
        })
        .collect())
}

/// Stand-in nominal dynamics for machine replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MachineParams {
    pub num_states: usize,
    pub kind: UncertaintyKind,
    pub radius: f64,
    pub discount: f64,
    /// Probability that an unrepaired machine moves one condition state down.
    pub aging: f64,
    /// From the standard repair state: probability of returning to perfect condition;
    /// the rest goes to long repair.
    pub repair_success: f64,
    /// From the long repair state: probability of returning to perfect condition.
    pub long_repair_exit: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for MachineParams {
    fn default() -> Self {
        MachineParams {
            num_states: 10,
            kind: UncertaintyKind::Ellipsoidal,
            radius: (10.0f64 * 2.0).sqrt(),
            discount: 0.8,
            aging: 0.2,
            repair_success: 0.8,
            long_repair_exit: 0.5,
            samples: 0,
            seed: 0,
        }
    }
}

/// Actions: 0 = no repair, 1 = repair. States (0-based): `0..S-2` operative with
/// `S-3` the worst, `S-2` standard repair, `S-1` long repair.
pub fn gen_machine_replacement(params: &MachineParams) -> Result<(RobustMdp, Vec<Vec<f64>>)> {
    let ns = params.num_states;
    if ns < 5 {
        return Err(RmdpError::Config(format!("machine replacement needs S >= 5 (got {ns})")));
    }
    for (name, p) in [
        ("aging", params.aging),
        ("repair_success", params.repair_success),
        ("long_repair_exit", params.long_repair_exit),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(RmdpError::Config(format!("{name} = {p} is not a probability")));
        }
    }
    let na = 2;
    let worst = ns - 3;
    let (repair, long) = (ns - 2, ns - 1);
    let mut kernel = vec![0.0; ns * na * ns];
    let mut costs = vec![0.0; ns * na];
    for s in 0..ns {
        let cost = match s {
            _ if s == worst => 20.0,
            _ if s == repair => 2.0,
            _ if s == long => 10.0,
            _ => 0.0,
        };
        costs[s * na] = cost;
        costs[s * na + 1] = cost;
        for a in 0..na {
            let row = &mut kernel[(s * na + a) * ns..(s * na + a + 1) * ns];
            if s == repair {
                row[0] += params.repair_success;
                row[long] += 1.0 - params.repair_success;
            } else if s == long {
                row[0] += params.long_repair_exit;
                row[long] += 1.0 - params.long_repair_exit;
            } else if a == 1 {
                row[repair] = 1.0;
            } else {
                let next = if s == worst { repair } else { s + 1 };
                row[s] += 1.0 - params.aging;
                row[next] += params.aging;
            }
        }
    }
    let instance = RobustMdp::new(
        ns,
        na,
        params.discount,
        costs,
        kernel,
        vec![1.0 / ns as f64; ns],
        spec_for(params.kind, params.radius),
    )?;
    let samples = perturb_samples(instance.nominal_kernel(), ns, na, params.samples, 0.2, params.seed)?;
    Ok((instance, samples))
}

/// Stand-in nominal dynamics for the healthcare model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HealthcareParams {
    pub num_states: usize,
    pub kind: UncertaintyKind,
    pub discount: f64,
    pub samples: usize,
    pub seed: u64,
    /// Per drug level (low, medium, high): probability of moving one state towards mortality.
    pub deterioration: [f64; 3],
    /// Per drug level: probability of moving one state towards health.
    pub improvement: [f64; 3],
    /// Per drug level: factor on the state-dependent mortality risk.
    pub mortality_factor: [f64; 3],
    /// Mortality risk in the sickest health state under factor 1.
    pub mortality_risk: f64,
    pub drug_cost: [f64; 3],
    /// Cost of the sickest health state; health costs grow linearly from 0.
    pub health_cost: f64,
    pub mortality_cost: f64,
}

impl Default for HealthcareParams {
    fn default() -> Self {
        HealthcareParams {
            num_states: 6,
            kind: UncertaintyKind::Ellipsoidal,
            discount: 0.8,
            samples: 60,
            seed: 0,
            deterioration: [0.3, 0.2, 0.1],
            improvement: [0.1, 0.2, 0.3],
            mortality_factor: [1.0, 0.8, 0.6],
            mortality_risk: 0.1,
            drug_cost: [0.0, 1.0, 2.0],
            health_cost: 5.0,
            mortality_cost: 10.0,
        }
    }
}

impl HealthcareParams {
    /// `sqrt(S A)` with `A = 3`.
    pub fn radius(&self) -> f64 {
        (3.0 * self.num_states as f64).sqrt()
    }
}

/// Actions 0/1/2 = low/medium/high drug level. States `0..S-1` are health
/// states (0 healthiest); `S-1` is the absorbing mortality state.
pub fn gen_healthcare(params: &HealthcareParams) -> Result<(RobustMdp, Vec<Vec<f64>>)> {
    let ns = params.num_states;
    if ns < 3 {
        return Err(RmdpError::Config(format!("healthcare needs S >= 3 (got {ns})")));
    }
    let na = 3;
    let dead = ns - 1;
    let sickest = (ns - 2) as f64;
    let mut kernel = vec![0.0; ns * na * ns];
    let mut costs = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            let row = &mut kernel[(s * na + a) * ns..(s * na + a + 1) * ns];
            if s == dead {
                row[dead] = 1.0;
                costs[s * na + a] = params.mortality_cost;
                continue;
            }
            let death = params.mortality_risk * params.mortality_factor[a] * (s as f64 + 1.0) / (sickest + 1.0);
            let worse = params.deterioration[a];
            let better = if s == 0 { 0.0 } else { params.improvement[a] };
            let stay = 1.0 - death - worse - better;
            if !(death >= 0.0 && worse >= 0.0 && better >= 0.0 && stay >= 0.0) {
                return Err(RmdpError::Config(format!(
                    "healthcare probabilities at state {s}, action {a} do not form a distribution"
                )));
            }
            row[dead] += death;
            row[s + 1] += worse;
            if s > 0 {
                row[s - 1] += better;
            }
            row[s] += stay;
            let health = if sickest > 0.0 { params.health_cost * s as f64 / sickest } else { 0.0 };
            costs[s * na + a] = health + params.drug_cost[a];
        }
    }
    let instance = RobustMdp::new(
        ns,
        na,
        params.discount,
        costs,
        kernel,
        vec![1.0 / ns as f64; ns],
        spec_for(params.kind, params.radius()),
    )?;
    let samples = perturb_samples(instance.nominal_kernel(), ns, na, params.samples, 0.2, params.seed)?;
    Ok((instance, samples))
}

/// Generator record written next to an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub library_version: String,
    /// Set for generators whose nominal dynamics are stand-ins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Instance JSON plus optional provenance and perturbation samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    #[serde(flatten)]
    pub instance: RobustMdp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    /// Perturbed kernels, each row-major `S x A x S`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Vec<f64>>,
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(text)
            .map_err(|e| RmdpError::InvalidInstance(format!("malformed instance JSON: {e}")))?;
        doc.instance.validate()?;
        Ok(doc)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| RmdpError::InvalidInstance(format!("cannot serialize instance: {e}")))
    }
}

fn provenance<P: Serialize>(generator: &str, params: &P, seed: u64, note: Option<&str>) -> Provenance {
    Provenance {
        generator: generator.to_string(),
        parameters: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
        seed,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        note: note.map(str::to_string),
    }
}

const STAND_IN: &str = "nominal kernel is a documented stand-in parameterization, not the published figures";

pub fn garnet_document(params: &GarnetParams, kind: UncertaintyKind) -> Result<InstanceDocument> {
    #[derive(Serialize)]
    struct Record<'a> {
        #[serde(flatten)]
        params: &'a GarnetParams,
        uncertainty_kind: UncertaintyKind,
    }
    Ok(InstanceDocument {
        instance: gen_garnet(params, kind)?,
        provenance: Some(provenance("garnet", &Record { params, uncertainty_kind: kind }, params.seed, None)),
        samples: Vec::new(),
    })
}

pub fn machine_document(params: &MachineParams) -> Result<InstanceDocument> {
    let (instance, samples) = gen_machine_replacement(params)?;
    Ok(InstanceDocument {
        instance,
        provenance: Some(provenance("machine_replacement", params, params.seed, Some(STAND_IN))),
        samples,
    })
}

pub fn healthcare_document(params: &HealthcareParams) -> Result<InstanceDocument> {
    let (instance, samples) = gen_healthcare(params)?;
    Ok(InstanceDocument {
        instance,
        provenance: Some(provenance("healthcare", params, params.seed, Some(STAND_IN))),
        samples,
    })
}
