//! Controller genomes for a fixed 2-8-1 network.
//!
//! Three architectures share the topology and differ in dynamics: a
//! memoryless feed-forward net, a recurrent net with per-neuron
//! self-connections, and a continuous-time net with per-neuron time
//! constants. Weights and biases live in [-5, 5], self-connections in
//! [-1, 1], time constants in [0.005, 5] s and mutate in log space. The
//! architecture tag itself never mutates.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub const INPUTS: usize = 2;
pub const HIDDEN: usize = 8;
/// Total neurons: two inputs, eight hidden, one output.
pub const NEURONS: usize = INPUTS + HIDDEN + 1;

pub const WEIGHT_BOUND: f64 = 5.0;
pub const RECURRENT_BOUND: f64 = 1.0;
pub const TAU_MIN: f64 = 0.005;
pub const TAU_MAX: f64 = 5.0;

/// Network dynamics family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    /// Feed-forward, memoryless.
    Nn,
    /// Discrete-time recurrent: per-neuron self-connection.
    Rnn,
    /// Continuous-time recurrent: per-neuron time constant.
    Ctrnn,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Nn, Arch::Rnn, Arch::Ctrnn];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Nn => "nn",
            Arch::Rnn => "rnn",
            Arch::Ctrnn => "ctrnn",
        }
    }
}

impl std::str::FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(Arch::Nn),
            "rnn" => Ok(Arch::Rnn),
            "ctrnn" => Ok(Arch::Ctrnn),
            other => Err(Error::InvalidConfig(format!("unknown architecture {other:?}"))),
        }
    }
}

/// One controller genome. `theta` covers the nine non-input neurons
/// (hidden first, output last); `r` and `tau` cover all eleven neurons in
/// layer order (inputs, hidden, output).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub arch: Arch,
    /// Input-to-hidden weights, `w1[input][hidden]`.
    pub w1: [[f64; HIDDEN]; INPUTS],
    /// Hidden-to-output weights.
    pub w2: [f64; HIDDEN],
    /// Biases of the non-input neurons.
    pub theta: [f64; HIDDEN + 1],
    /// Self-connection strengths (recurrent architecture only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<[f64; NEURONS]>,
    /// Time constants, s (continuous-time architecture only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<[f64; NEURONS]>,
}

impl Genome {
    /// All-zero genome of the given architecture (time constants default
    /// to the slowest value, self-connections to zero). Its controller
    /// output is identically zero.
    pub fn zero(arch: Arch) -> Self {
        Genome {
            arch,
            w1: [[0.0; HIDDEN]; INPUTS],
            w2: [0.0; HIDDEN],
            theta: [0.0; HIDDEN + 1],
            r: (arch == Arch::Rnn).then_some([0.0; NEURONS]),
            tau: (arch == Arch::Ctrnn).then_some([TAU_MAX; NEURONS]),
        }
    }

    /// Number of evolvable scalars.
    pub fn gene_count(&self) -> usize {
        let base = INPUTS * HIDDEN + HIDDEN + HIDDEN + 1;
        match self.arch {
            Arch::Nn => base,
            Arch::Rnn | Arch::Ctrnn => base + NEURONS,
        }
    }

    /// Reject genomes whose optional blocks disagree with the tag or
    /// whose genes leave the legal ranges.
    pub fn validate(&self) -> Result<()> {
        match self.arch {
            Arch::Nn => {
                if self.r.is_some() || self.tau.is_some() {
                    return Err(Error::GenomeShape(
                        "feed-forward genome carries dynamic genes".into(),
                    ));
                }
            }
            Arch::Rnn => {
                if self.r.is_none() || self.tau.is_some() {
                    return Err(Error::GenomeShape(
                        "recurrent genome needs r and no tau".into(),
                    ));
                }
            }
            Arch::Ctrnn => {
                if self.tau.is_none() || self.r.is_some() {
                    return Err(Error::GenomeShape(
                        "continuous-time genome needs tau and no r".into(),
                    ));
                }
            }
        }
        let weights = self
            .w1
            .iter()
            .flatten()
            .chain(self.w2.iter())
            .chain(self.theta.iter());
        for &w in weights {
            if !w.is_finite() || w.abs() > WEIGHT_BOUND {
                return Err(Error::GenomeShape(format!("weight {w} out of range")));
            }
        }
        if let Some(r) = &self.r {
            for &x in r {
                if !x.is_finite() || x.abs() > RECURRENT_BOUND {
                    return Err(Error::GenomeShape(format!("r {x} out of range")));
                }
            }
        }
        if let Some(tau) = &self.tau {
            for &x in tau {
                if !x.is_finite() || !(TAU_MIN..=TAU_MAX).contains(&x) {
                    return Err(Error::GenomeShape(format!("tau {x} out of range")));
                }
            }
        }
        Ok(())
    }
}

/// Fresh genome: weights, biases and self-connections uniform in
/// (-1, 1); time constants log-uniform over their full range.
pub fn random_genome(arch: Arch, rng: &mut ChaCha8Rng) -> Genome {
    let mut g = Genome::zero(arch);
    for row in g.w1.iter_mut() {
        for w in row.iter_mut() {
            *w = rng.gen_range(-1.0..1.0);
        }
    }
    for w in g.w2.iter_mut() {
        *w = rng.gen_range(-1.0..1.0);
    }
    for t in g.theta.iter_mut() {
        *t = rng.gen_range(-1.0..1.0);
    }
    if let Some(r) = g.r.as_mut() {
        for x in r.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    if let Some(tau) = g.tau.as_mut() {
        let (lo, hi) = (TAU_MIN.ln(), TAU_MAX.ln());
        for x in tau.iter_mut() {
            *x = rng.gen_range(lo..hi).exp();
        }
    }
    g
}

fn perturb(value: f64, span: f64, lo: f64, hi: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    let noise = Normal::new(0.0, sigma).expect("sigma validated");
    (value + noise.sample(rng) * span).clamp(lo, hi)
}

/// Mutate every gene independently with probability `rate`; a mutated
/// gene moves by a normal step scaled to the width of its legal range and
/// is clamped back into it. Time constants take the step in log space.
/// Gene order (weights, biases, then dynamic genes) is fixed, so a seeded
/// stream reproduces the same offspring.
pub fn mutate(genome: &Genome, rate: f64, sigma: f64, rng: &mut ChaCha8Rng) -> Genome {
    let mut g = genome.clone();
    let wspan = 2.0 * WEIGHT_BOUND;
    for row in g.w1.iter_mut() {
        for w in row.iter_mut() {
            if rng.gen::<f64>() < rate {
                *w = perturb(*w, wspan, -WEIGHT_BOUND, WEIGHT_BOUND, sigma, rng);
            }
        }
    }
    for w in g.w2.iter_mut() {
        if rng.gen::<f64>() < rate {
            *w = perturb(*w, wspan, -WEIGHT_BOUND, WEIGHT_BOUND, sigma, rng);
        }
    }
    for t in g.theta.iter_mut() {
        if rng.gen::<f64>() < rate {
            *t = perturb(*t, wspan, -WEIGHT_BOUND, WEIGHT_BOUND, sigma, rng);
        }
    }
    if let Some(r) = g.r.as_mut() {
        let span = 2.0 * RECURRENT_BOUND;
        for x in r.iter_mut() {
            if rng.gen::<f64>() < rate {
                *x = perturb(*x, span, -RECURRENT_BOUND, RECURRENT_BOUND, sigma, rng);
            }
        }
    }
    if let Some(tau) = g.tau.as_mut() {
        let (lo, hi) = (TAU_MIN.ln(), TAU_MAX.ln());
        for x in tau.iter_mut() {
            if rng.gen::<f64>() < rate {
                *x = perturb(x.ln(), hi - lo, lo, hi, sigma, rng).exp();
            }
        }
    }
    g
}
