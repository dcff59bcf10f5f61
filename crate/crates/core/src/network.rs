//! Network evaluation for the three genome architectures.
//!
//! All three share the 2-8-1 wiring and a state vector of eleven neuron
//! potentials (inputs, hidden, output). The observed divergence pair
//! enters as external input at the two input neurons only; the published
//! control command is the raw output-neuron potential, unclamped.
//!
//! Update rules, applied synchronously from the previous potentials for
//! the dynamic families:
//!
//! * feed-forward: potentials are recomputed from the inputs alone each
//!   tick; rectified hidden sums get the bias added after the
//!   nonlinearity, the output is a plain affine read-out. Memoryless.
//! * recurrent: each neuron keeps `r` times its previous potential and
//!   adds its freshly propagated drive. One tick is one update; the time
//!   step does not enter.
//! * continuous-time: each potential relaxes toward its drive with rate
//!   `dt / (dt + tau)`; presynaptic potentials pass through `tanh` with
//!   the presynaptic neuron's bias added inside.
//!
//! The bias placement genuinely differs between the families (outside
//! the rectifier for the feed-forward net, inside the squash for the
//! continuous-time net); both forms are kept exactly as defined.

use crate::genome::{Arch, Genome, HIDDEN, INPUTS, NEURONS};

const OUT: usize = NEURONS - 1;

/// Neuron potentials carried between ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkState {
    pub potentials: [f64; NEURONS],
}

impl NetworkState {
    pub fn zeroed() -> Self {
        NetworkState {
            potentials: [0.0; NEURONS],
        }
    }

    pub fn output(&self) -> f64 {
        self.potentials[OUT]
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Advance the network one control tick and return the command.
pub fn step(genome: &Genome, state: &mut NetworkState, inputs: [f64; INPUTS], dt: f64) -> f64 {
    let old = state.potentials;
    let new = &mut state.potentials;
    match genome.arch {
        Arch::Nn => {
            new[0] = inputs[0];
            new[1] = inputs[1];
            for h in 0..HIDDEN {
                let sum = genome.w1[0][h] * new[0] + genome.w1[1][h] * new[1];
                new[2 + h] = relu(sum) + genome.theta[h];
            }
            let mut out = genome.theta[HIDDEN];
            for h in 0..HIDDEN {
                out += genome.w2[h] * new[2 + h];
            }
            new[OUT] = out;
        }
        Arch::Rnn => {
            let r = genome.r.as_ref().expect("validated recurrent genome");
            new[0] = old[0] * r[0] + inputs[0];
            new[1] = old[1] * r[1] + inputs[1];
            for h in 0..HIDDEN {
                let sum = genome.w1[0][h] * old[0] + genome.w1[1][h] * old[1];
                new[2 + h] = old[2 + h] * r[2 + h] + relu(sum) + genome.theta[h];
            }
            let mut drive = genome.theta[HIDDEN];
            for h in 0..HIDDEN {
                drive += genome.w2[h] * old[2 + h];
            }
            new[OUT] = old[OUT] * r[OUT] + drive;
        }
        Arch::Ctrnn => {
            let tau = genome.tau.as_ref().expect("validated continuous-time genome");
            let blend = |j: usize, drive: f64| old[j] + dt * (-old[j] + drive) / (dt + tau[j]);
            new[0] = blend(0, inputs[0]);
            new[1] = blend(1, inputs[1]);
            for h in 0..HIDDEN {
                // Input neurons carry no bias; their potential is
                // squashed directly.
                let drive = genome.w1[0][h] * old[0].tanh() + genome.w1[1][h] * old[1].tanh();
                new[2 + h] = blend(2 + h, drive);
            }
            let mut drive = 0.0;
            for h in 0..HIDDEN {
                drive += genome.w2[h] * (old[2 + h] + genome.theta[h]).tanh();
            }
            new[OUT] = blend(OUT, drive);
        }
    }
    new[OUT]
}

/// Probe time step for steady-state responses, s.
pub const SS_DT: f64 = 0.025;
/// Convergence window: the output must move less than this...
pub const SS_EPS: f64 = 1e-6;
/// ...for this many consecutive steps.
pub const SS_WINDOW: usize = 20;
/// Give up after this many steps; a non-converging cell is a result, not
/// an error.
pub const SS_MAX_STEPS: usize = 10_000;

/// Output the network settles to under constant inputs, starting from a
/// zeroed state. `None` if it has not settled within the step budget.
pub fn steady_state_response(genome: &Genome, d_obs: f64, dd_obs: f64) -> Option<f64> {
    let mut state = NetworkState::zeroed();
    let mut prev = step(genome, &mut state, [d_obs, dd_obs], SS_DT);
    let mut quiet = 0usize;
    for _ in 1..SS_MAX_STEPS {
        let out = step(genome, &mut state, [d_obs, dd_obs], SS_DT);
        if (out - prev).abs() < SS_EPS {
            quiet += 1;
            if quiet >= SS_WINDOW {
                return Some(out);
            }
        } else {
            quiet = 0;
        }
        prev = out;
    }
    None
}

/// A genome wired up as a landing policy.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuroController {
    pub genome: Genome,
    pub state: NetworkState,
}

impl NeuroController {
    pub fn new(genome: Genome) -> Self {
        NeuroController {
            genome,
            state: NetworkState::zeroed(),
        }
    }
}

impl crate::controller::Controller for NeuroController {
    fn reset(&mut self) {
        self.state = NetworkState::zeroed();
    }

    fn command(&mut self, d_obs: f64, dd_obs: f64, dt: f64) -> f64 {
        step(&self.genome, &mut self.state, [d_obs, dd_obs], dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{random_genome, TAU_MAX};
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn zero_genome_outputs_zero() {
        for arch in Arch::ALL {
            let g = Genome::zero(arch);
            let mut s = NetworkState::zeroed();
            for _ in 0..10 {
                assert_eq!(step(&g, &mut s, [0.0, 0.0], 0.025), 0.0);
            }
        }
    }

    #[test]
    fn feed_forward_is_memoryless() {
        let mut r = rng::stream(1, &[]);
        let g = random_genome(Arch::Nn, &mut r);
        let inputs = [0.6, -1.2];
        let mut out0 = None;
        for _ in 0..5 {
            let mut s = NetworkState {
                potentials: std::array::from_fn(|_| r.gen_range(-3.0..3.0)),
            };
            let out = step(&g, &mut s, inputs, 0.025);
            match out0 {
                None => out0 = Some(out),
                Some(o) => assert_eq!(out, o),
            }
        }
    }

    #[test]
    fn feed_forward_hidden_potentials_sit_above_their_bias() {
        let mut r = rng::stream(2, &[]);
        for _ in 0..20 {
            let g = random_genome(Arch::Nn, &mut r);
            let mut s = NetworkState::zeroed();
            step(&g, &mut s, [r.gen_range(-1.0..2.0), r.gen_range(-4.0..4.0)], 0.025);
            for h in 0..HIDDEN {
                assert!(s.potentials[2 + h] >= g.theta[h]);
            }
        }
    }

    #[test]
    fn recurrent_update_ignores_the_time_step() {
        let mut r = rng::stream(3, &[]);
        let g = random_genome(Arch::Rnn, &mut r);
        let mut a = NetworkState::zeroed();
        let mut b = NetworkState::zeroed();
        for i in 0..50 {
            let inputs = [(i as f64 * 0.1).sin(), (i as f64 * 0.23).cos()];
            let oa = step(&g, &mut a, inputs, 0.02);
            let ob = step(&g, &mut b, inputs, 0.033);
            assert_eq!(oa, ob);
        }
    }

    #[test]
    fn continuous_time_single_neuron_matches_the_closed_form() {
        // A lone integrating neuron: no weights, no bias, unit input,
        // tau = 0.1 s, dt = 0.05 s. One step from rest moves the
        // potential by dt * input / (dt + tau) = 1/3.
        let mut g = Genome::zero(Arch::Ctrnn);
        g.tau.as_mut().unwrap()[0] = 0.1;
        let mut s = NetworkState::zeroed();
        step(&g, &mut s, [1.0, 0.0], 0.05);
        let expect = 0.05 * 1.0 / (0.05 + 0.1);
        assert_eq!(s.potentials[0], expect);
        assert_abs_diff_eq!(s.potentials[0], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn continuous_time_neuron_relaxes_to_its_drive() {
        let mut g = Genome::zero(Arch::Ctrnn);
        g.tau.as_mut().unwrap()[0] = 0.1;
        let mut s = NetworkState::zeroed();
        for _ in 0..2000 {
            step(&g, &mut s, [1.0, 0.0], 0.05);
        }
        assert_abs_diff_eq!(s.potentials[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn continuous_time_potentials_stay_bounded() {
        let mut r = rng::stream(4, &[]);
        let g = random_genome(Arch::Ctrnn, &mut r);
        // Per-neuron drive bound: the largest weighted squash sum plus
        // external input; each update is a convex blend with it.
        let mut bound = [0.0f64; NEURONS];
        bound[0] = 2.0;
        bound[1] = 4.0;
        for h in 0..HIDDEN {
            bound[2 + h] = g.w1[0][h].abs() + g.w1[1][h].abs();
        }
        bound[OUT] = g.w2.iter().map(|w| w.abs()).sum();
        let mut s = NetworkState::zeroed();
        for _ in 0..100_000 {
            let inputs = [r.gen_range(-2.0..2.0), r.gen_range(-4.0..4.0)];
            step(&g, &mut s, inputs, 0.025);
            for (j, &b) in bound.iter().enumerate() {
                assert!(
                    s.potentials[j].abs() <= b + 1e-9,
                    "neuron {j}: {} > {b}",
                    s.potentials[j]
                );
            }
        }
    }

    #[test]
    fn continuous_time_integration_error_is_first_order() {
        let mut r = rng::stream(5, &[]);
        let mut g = random_genome(Arch::Ctrnn, &mut r);
        // Pin the time constants so the discretization error is not
        // dominated by neurons that settle within a single step.
        *g.tau.as_mut().unwrap() = [0.5, 1.0, 0.2, 0.8, 1.5, 0.3, 2.0, 0.6, 1.2, 0.4, 3.0];
        let run = |dt: f64| -> [f64; NEURONS] {
            let mut s = NetworkState::zeroed();
            let steps = (1.0 / dt).round() as usize;
            for _ in 0..steps {
                step(&g, &mut s, [0.8, -0.4], dt);
            }
            s.potentials
        };
        let reference = run(0.0025);
        let err = |dt: f64| -> f64 {
            run(dt)
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.04) / err(0.02);
        assert!(
            (1.5..=2.5).contains(&ratio),
            "halving dt should near-halve the error, ratio {ratio}"
        );
    }

    #[test]
    fn steady_state_of_feed_forward_equals_its_single_step() {
        let mut r = rng::stream(6, &[]);
        for _ in 0..10 {
            let g = random_genome(Arch::Nn, &mut r);
            let mut s = NetworkState::zeroed();
            let single = step(&g, &mut s, [0.7, 1.1], SS_DT);
            assert_eq!(steady_state_response(&g, 0.7, 1.1), Some(single));
        }
    }

    #[test]
    fn steady_state_reports_non_convergence() {
        // A pure accumulator: unit self-connection on the output neuron
        // and a constant bias drive it linearly forever.
        let mut g = Genome::zero(Arch::Rnn);
        g.r.as_mut().unwrap()[OUT] = 1.0;
        g.theta[HIDDEN] = 0.5;
        assert_eq!(steady_state_response(&g, 0.0, 0.0), None);
    }

    #[test]
    fn steady_state_of_slow_integrator_converges() {
        let mut g = Genome::zero(Arch::Ctrnn);
        g.tau.as_mut().unwrap()[OUT] = TAU_MAX;
        g.w1[0][0] = 1.0;
        g.w2[0] = 2.0;
        g.theta[0] = 0.3;
        let out = steady_state_response(&g, 1.5, 0.0).unwrap();
        // Fixed point: output drive with the input neuron settled at 1.5.
        // The convergence window fires while the slow chain is still a few
        // hundred micro-units short, hence the loose tolerance.
        let expect = 2.0 * (1.5f64.tanh() + 0.3).tanh();
        assert_abs_diff_eq!(out, expect, epsilon = 2e-3);
    }

    #[test]
    fn controller_reset_restores_the_initial_state() {
        use crate::controller::Controller;
        let mut r = rng::stream(7, &[]);
        let g = random_genome(Arch::Ctrnn, &mut r);
        let mut c = NeuroController::new(g);
        let first = c.command(0.5, -0.2, 0.025);
        for _ in 0..10 {
            c.command(0.5, -0.2, 0.025);
        }
        c.reset();
        assert_eq!(c.state, NetworkState::zeroed());
        assert_eq!(c.command(0.5, -0.2, 0.025), first);
    }
}
