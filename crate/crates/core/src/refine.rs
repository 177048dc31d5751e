//! Post-training refinement by random perturbation of hidden-layer weights.
//!
//! After training, each iteration snapshots the network, adds uniform noise to
//! every hidden weight and bias, and keeps the perturbed weights only when the
//! objective strictly improves. Otherwise the snapshot is restored. The
//! accepted objective therefore never increases.

use crate::error::{Error, Result};
use crate::network::{Network, WeightBounds};
use crate::prng::RandomSource;

/// Default number of perturbation trials, one per evaluation point.
pub const DEFAULT_ITERATIONS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Noise amplitude as a percentage of the bounds' half-width.
    pub noise_percent: f64,
    pub iterations: usize,
    pub bounds: WeightBounds,
}

impl NoiseSpec {
    pub fn new(noise_percent: f64, iterations: usize, bounds: WeightBounds) -> Result<Self> {
        let spec = NoiseSpec {
            noise_percent,
            iterations,
            bounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_percent.is_finite() && self.noise_percent >= 0.0) {
            return Err(Error::invalid(format!(
                "noise_percent must be finite and >= 0, got {}",
                self.noise_percent
            )));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("refinement needs at least one iteration"));
        }
        Ok(())
    }

    /// Largest absolute change applied to a single parameter.
    pub fn amplitude(&self) -> f64 {
        self.noise_percent / 100.0 * self.bounds.half_width()
    }
}

/// Copy of every parameter of a network, tagged with its topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl Snapshot {
    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }
}

pub fn backup_state(net: &Network) -> Snapshot {
    Snapshot {
        sizes: net.layer_sizes().to_vec(),
        params: net.params(),
    }
}

/// Overwrites `net` with the snapshot's parameters.
pub fn restore_state(net: &mut Network, snapshot: &Snapshot) -> Result<()> {
    if net.layer_sizes() != snapshot.sizes.as_slice() {
        return Err(Error::invalid(format!(
            "snapshot of a {:?} network cannot be restored onto a {:?} network",
            snapshot.sizes,
            net.layer_sizes()
        )));
    }
    net.set_params(&snapshot.params)
}

/// Adds `next_symmetric() * amplitude` to every incoming weight and bias of
/// every hidden layer (canonical order). The output layer is left alone and
/// the result is not clamped.
pub fn add_hidden_noise<R: RandomSource + ?Sized>(
    net: &Network,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<Network> {
    let hidden = net.layers().len() - 1;
    if hidden == 0 {
        return Err(Error::invalid("network has no hidden layer to perturb"));
    }
    let amplitude = spec.amplitude();
    let mut out = net.clone();
    for layer in &mut out.layers_mut()[..hidden] {
        layer.for_each_param_mut(|p| *p += rng.next_symmetric() * amplitude);
    }
    Ok(out)
}

/// Error functional driving refinement, plus the points at which each
/// iteration's output is reported.
pub trait Objective {
    fn error(&self, net: &Network) -> Result<f64>;

    /// Evaluation points; iteration `k` reports at `eval_points()[k % len]`.
    fn eval_points(&self) -> &[f64];

    /// Reference value at `x`, recorded alongside the outputs.
    fn target(&self, x: f64) -> f64;
}

/// One refinement iteration. "Classical" is the current network, "quantum"
/// the perturbed one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub eval_x: f64,
    pub target: f64,
    pub classical_output: f64,
    pub quantum_output: f64,
    pub classical_error: f64,
    pub quantum_error: f64,
    pub accepted: bool,
}

impl TraceRow {
    /// Objective of the network carried into the next iteration.
    pub fn objective_after(&self) -> f64 {
        if self.accepted {
            self.quantum_error
        } else {
            self.classical_error
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefinementTrace {
    pub rows: Vec<TraceRow>,
}

impl RefinementTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Objective after each iteration.
    pub fn accepted_objectives(&self) -> Vec<f64> {
        self.rows.iter().map(TraceRow::objective_after).collect()
    }

    pub fn accepted_count(&self) -> usize {
        self.rows.iter().filter(|r| r.accepted).count()
    }

    pub fn initial_objective(&self) -> Option<f64> {
        self.rows.first().map(|r| r.classical_error)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(TraceRow::objective_after)
    }
}

/// Greedy noise refinement. Perturbations accumulate: an accepted network is
/// the starting point of the next iteration. Ties are rejected.
pub fn refine<O, R>(
    net: &Network,
    objective: &O,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<(Network, RefinementTrace)>
where
    O: Objective + ?Sized,
    R: RandomSource + ?Sized,
{
    spec.validate()?;
    let points = objective.eval_points();
    if points.is_empty() {
        return Err(Error::invalid("objective has no evaluation points"));
    }

    let mut current = net.clone();
    let mut current_error = objective.error(&current)?;
    let mut rows = Vec::with_capacity(spec.iterations);

    for k in 0..spec.iterations {
        let x = points[k % points.len()];
        let classical_output = current.forward(x)?;

        let snapshot = backup_state(&current);
        current = add_hidden_noise(&current, spec, rng)?;
        let quantum_output = current.forward(x)?;
        let quantum_error = objective.error(&current)?;

        let accepted = quantum_error < current_error;
        rows.push(TraceRow {
            iteration: k + 1,
            eval_x: x,
            target: objective.target(x),
            classical_output,
            quantum_output,
            classical_error: current_error,
            quantum_error,
            accepted,
        });

        if accepted {
            current_error = quantum_error;
        } else {
            restore_state(&mut current, &snapshot)?;
        }
    }

    Ok((current, RefinementTrace { rows }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::DEFAULT_LAYER_SIZES;
    use crate::prng::Prng;

    struct ConstantSource;

    impl RandomSource for ConstantSource {
        fn next_u32(&mut self) -> u32 {
            u32::MAX
        }

        fn next_symmetric(&mut self) -> f64 {
            1.0
        }
    }

    /// RMS against sin on a small grid.
    struct SinObjective(Vec<f64>);

    impl Objective for SinObjective {
        fn error(&self, net: &Network) -> Result<f64> {
            let mut s = 0.0;
            for &x in &self.0 {
                let r = net.forward(x)? - x.sin();
                s += r * r;
            }
            Ok((s / self.0.len() as f64).sqrt())
        }

        fn eval_points(&self) -> &[f64] {
            &self.0
        }

        fn target(&self, x: f64) -> f64 {
            x.sin()
        }
    }

    fn bounds() -> WeightBounds {
        WeightBounds::symmetric(2.0).unwrap()
    }

    fn net(seed: u32) -> Network {
        Network::init_random(&DEFAULT_LAYER_SIZES, &bounds(), &mut Prng::new(seed)).unwrap()
    }

    fn objective() -> SinObjective {
        SinObjective((1..=8).map(|i| i as f64 / 9.0).collect())
    }

    #[test]
    fn amplitude_is_percent_of_half_width() {
        let spec = NoiseSpec::new(4.0, 32, WeightBounds::symmetric(12.0).unwrap()).unwrap();
        assert!((spec.amplitude() - 0.48).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(NoiseSpec::new(-1.0, 32, bounds()).is_err());
        assert!(NoiseSpec::new(1.0, 0, bounds()).is_err());
        assert!(NoiseSpec::new(f64::NAN, 3, bounds()).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let n = net(1);
        let spec = NoiseSpec::new(0.0, 32, bounds()).unwrap();
        assert_eq!(add_hidden_noise(&n, &spec, &mut Prng::new(2)).unwrap(), n);
    }

    #[test]
    fn constant_source_shifts_hidden_params_by_amplitude() {
        let n = net(3);
        let spec = NoiseSpec::new(2.0, 1, bounds()).unwrap();
        let a = spec.amplitude();
        let out = add_hidden_noise(&n, &spec, &mut ConstantSource).unwrap();
        let (h0, h1) = (&n.layers()[0], &out.layers()[0]);
        for j in 0..4 {
            assert_eq!(h1.weight(j, 0), h0.weight(j, 0) + a);
            assert_eq!(h1.bias(j), h0.bias(j) + a);
        }
        assert_eq!(out.layers()[1], n.layers()[1]);
    }

    #[test]
    fn noise_not_clamped_and_output_layer_untouched() {
        let b = WeightBounds::symmetric(1.0).unwrap();
        let n = Network::from_params(&[1, 2, 1], &[1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5]).unwrap();
        let spec = NoiseSpec::new(50.0, 1, b).unwrap();
        let out = add_hidden_noise(&n, &spec, &mut ConstantSource).unwrap();
        assert_eq!(&out.params()[..4], &[1.5; 4]);
        assert_eq!(&out.params()[4..], &[0.5; 3]);
    }

    #[test]
    fn deep_network_perturbs_all_hidden_layers_only() {
        let n = Network::zeros(&[1, 3, 2, 1]).unwrap();
        let spec = NoiseSpec::new(10.0, 1, bounds()).unwrap();
        let out = add_hidden_noise(&n, &spec, &mut ConstantSource).unwrap();
        assert!(out.layers()[0].row(2).iter().all(|&w| w == 0.2));
        assert!(out.layers()[1].row(1).iter().all(|&w| w == 0.2));
        assert_eq!(out.layers()[2], n.layers()[2]);
    }

    #[test]
    fn no_hidden_layer_is_an_error() {
        let n = Network::zeros(&[1, 1]).unwrap();
        let spec = NoiseSpec::new(1.0, 1, bounds()).unwrap();
        assert!(add_hidden_noise(&n, &spec, &mut Prng::new(1)).is_err());
    }

    #[test]
    fn backup_perturb_restore_is_identity() {
        let mut n = net(4);
        let original = n.clone();
        let snap = backup_state(&n);
        n = add_hidden_noise(
            &n,
            &NoiseSpec::new(30.0, 1, bounds()).unwrap(),
            &mut Prng::new(4),
        )
        .unwrap();
        assert_ne!(n, original);
        restore_state(&mut n, &snap).unwrap();
        let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(bits(n.params()), bits(original.params()));
    }

    #[test]
    fn restore_onto_other_network_of_same_shape() {
        let a = net(5);
        let mut b = net(6);
        restore_state(&mut b, &backup_state(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn restore_shape_mismatch_is_error() {
        let a = net(5);
        let mut b = Network::zeros(&[1, 3, 1]).unwrap();
        assert!(restore_state(&mut b, &backup_state(&a)).is_err());
    }

    #[test]
    fn zero_noise_refinement_never_accepts() {
        let n = net(7);
        let spec = NoiseSpec::new(0.0, 32, bounds()).unwrap();
        let (out, trace) = refine(&n, &objective(), &spec, &mut Prng::new(7)).unwrap();
        assert_eq!(out, n);
        assert_eq!(trace.len(), 32);
        assert_eq!(trace.accepted_count(), 0);
        for row in &trace.rows {
            assert_eq!(row.quantum_error, row.classical_error);
            assert_eq!(row.quantum_output, row.classical_output);
        }
    }

    #[test]
    fn refinement_trace_invariants() {
        for seed in 0..30 {
            let n = net(seed);
            let obj = objective();
            let spec = NoiseSpec::new(5.0, 32, bounds()).unwrap();
            let initial = obj.error(&n).unwrap();
            let (out, trace) = refine(&n, &obj, &spec, &mut Prng::new(seed)).unwrap();

            assert_eq!(trace.initial_objective(), Some(initial));
            let objs = trace.accepted_objectives();
            assert!(objs.windows(2).all(|w| w[1] <= w[0]));
            assert!(obj.error(&out).unwrap() <= initial);
            assert_eq!(obj.error(&out).unwrap(), trace.final_objective().unwrap());

            for w in trace.rows.windows(2) {
                assert_eq!(w[1].classical_error, w[0].objective_after());
                if !w[0].accepted {
                    // Same network as the previous iteration, so same output error.
                    assert_eq!(w[1].classical_error, w[0].classical_error);
                }
            }
            for row in &trace.rows {
                if row.accepted {
                    assert!(row.quantum_error < row.classical_error);
                }
            }
            if trace.accepted_count() == 0 {
                assert_eq!(out, n);
            }
            assert_eq!(out.layers()[1], n.layers()[1]);
        }
    }

    #[test]
    fn refinement_is_deterministic() {
        let n = net(9);
        let spec = NoiseSpec::new(3.0, 32, bounds()).unwrap();
        let a = refine(&n, &objective(), &spec, &mut Prng::new(9)).unwrap();
        let b = refine(&n, &objective(), &spec, &mut Prng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eval_points_cycle_when_iterations_exceed_grid() {
        let n = net(2);
        let spec = NoiseSpec::new(1.0, 20, bounds()).unwrap();
        let obj = objective();
        let (_, trace) = refine(&n, &obj, &spec, &mut Prng::new(2)).unwrap();
        assert_eq!(trace.rows[8].eval_x, obj.0[0]);
        assert_eq!(trace.rows[19].eval_x, obj.0[3]);
    }
}
