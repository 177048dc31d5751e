//! Fully connected feedforward network with tanh units.
//!
//! Parameters have a canonical flat order used for random initialization,
//! annealing moves, snapshots and the text format: layer by layer, then
//! neuron by neuron, each neuron's incoming weights followed by its bias.

use crate::error::{Error, Result};
use crate::prng::RandomSource;

/// Default topology: one input, four hidden neurons, one output.
pub const DEFAULT_LAYER_SIZES: [usize; 3] = [1, 4, 1];

/// Closed interval constraining trainable parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightBounds {
    min: f64,
    max: f64,
}

impl WeightBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::invalid(format!(
                "weight bounds must be finite, got [{min}, {max}]"
            )));
        }
        if min >= max {
            return Err(Error::invalid(format!(
                "weight bounds need min < max, got [{min}, {max}]"
            )));
        }
        Ok(WeightBounds { min, max })
    }

    /// Symmetric bounds `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.max - self.min)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

/// Nonempty list of finite `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    points: Vec<(f64, f64)>,
}

impl TrainingSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("training set must not be empty"));
        }
        if let Some((x, y)) = points
            .iter()
            .find(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::invalid(format!(
                "training point ({x}, {y}) is not finite"
            )));
        }
        Ok(TrainingSet { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One non-input layer. `weights` is row-major: row `j` holds the incoming
/// weights of neuron `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.biases.len()
    }

    /// Weight from input `i` into neuron `j`.
    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.weights[j * self.inputs + i]
    }

    pub fn bias(&self, j: usize) -> f64 {
        self.biases[j]
    }

    /// Incoming weights of neuron `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.inputs..(j + 1) * self.inputs]
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    /// Canonical-order access to the `k`-th parameter of this layer.
    fn param_mut(&mut self, k: usize) -> &mut f64 {
        let stride = self.inputs + 1;
        let (j, i) = (k / stride, k % stride);
        if i == self.inputs {
            &mut self.biases[j]
        } else {
            &mut self.weights[j * self.inputs + i]
        }
    }

    pub(crate) fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for j in 0..self.outputs() {
            for w in &mut self.weights[j * self.inputs..(j + 1) * self.inputs] {
                f(w);
            }
            f(&mut self.biases[j]);
        }
    }

    fn activate(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.outputs()).map(|j| {
            let sum: f64 = self.row(j).iter().zip(input).map(|(w, x)| w * x).sum();
            (sum + self.biases[j]).tanh()
        }));
    }
}

/// Feedforward network where every non-input neuron computes `tanh(w . x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    layers: Vec<Layer>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::invalid(format!(
            "a network needs at least an input and an output layer, got sizes {sizes:?}"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::invalid(format!(
            "layer sizes must be positive, got {sizes:?}"
        )));
    }
    Ok(())
}

impl Network {
    /// Network of the given topology with every parameter zero.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Ok(Network {
            sizes: sizes.to_vec(),
            layers,
        })
    }

    /// Builds a network from its parameters in canonical order.
    pub fn from_params(sizes: &[usize], params: &[f64]) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        net.set_params(params)?;
        Ok(net)
    }

    /// Uniform initialization of every parameter in `[min, max]`.
    ///
    /// Consumes exactly one `next_unit` draw per parameter, in canonical order.
    pub fn init_random<R: RandomSource + ?Sized>(
        sizes: &[usize],
        bounds: &WeightBounds,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let (lo, width) = (bounds.min(), bounds.width());
        for layer in &mut net.layers {
            layer.for_each_param_mut(|p| *p = bounds.clamp(lo + rng.next_unit() * width));
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Non-input layers, in order.
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// All parameters in canonical order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for j in 0..layer.outputs() {
                out.extend_from_slice(layer.row(j));
                out.push(layer.biases[j]);
            }
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        let mut it = params.iter();
        for layer in &mut self.layers {
            layer.for_each_param_mut(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    /// Mutable access to the parameter at canonical index `idx`.
    pub fn param_mut(&mut self, mut idx: usize) -> Option<&mut f64> {
        for layer in &mut self.layers {
            let n = layer.param_count();
            if idx < n {
                return Some(layer.param_mut(idx));
            }
            idx -= n;
        }
        None
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|p| p.is_finite()))
    }

    pub fn within(&self, bounds: &WeightBounds) -> bool {
        self.layers.iter().all(|l| {
            l.weights
                .iter()
                .chain(&l.biases)
                .all(|&p| bounds.contains(p))
        })
    }

    /// Same topology as `other`.
    pub fn same_shape(&self, other: &Network) -> bool {
        self.sizes == other.sizes
    }

    /// Evaluates the network on an input vector of the input layer's width.
    pub fn forward_vec(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.sizes[0] {
            return Err(Error::invalid(format!(
                "input has {} values, network expects {}",
                input.len(),
                self.sizes[0]
            )));
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("network input must be finite"));
        }
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.activate(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Scalar evaluation for a single-input, single-output network.
    pub fn forward(&self, x: f64) -> Result<f64> {
        if self.sizes[0] != 1 || self.sizes[self.sizes.len() - 1] != 1 {
            return Err(Error::invalid(format!(
                "scalar forward needs one input and one output neuron, network is {:?}",
                self.sizes
            )));
        }
        Ok(self.forward_vec(&[x])?[0])
    }

    /// Text form: a header with the layer sizes, then one parameter per line
    /// in canonical order, each with 17 significant digits.
    pub fn to_text(&self) -> String {
        let header: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        let mut out = header.join(" ");
        out.push('\n');
        for p in self.params() {
            out.push_str(&format_f64(p));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing layer-size header"))?;
        let sizes = header
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::parse(1, format!("bad layer size {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut net = Self::zeros(&sizes).map_err(|e| Error::parse(1, e.to_string()))?;

        let mut params = Vec::with_capacity(net.param_count());
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = line
                .parse::<f64>()
                .map_err(|e| Error::parse(i + 1, format!("bad parameter {line:?}: {e}")))?;
            params.push(v);
        }
        net.set_params(&params)
            .map_err(|e| Error::parse(text.lines().count(), e.to_string()))?;
        Ok(net)
    }
}

/// Root mean square of the network's residuals over the data.
pub fn rms_error(net: &Network, data: &TrainingSet) -> Result<f64> {
    let mut sum = 0.0;
    for &(x, y) in data.points() {
        let r = net.forward(x)? - y;
        sum += r * r;
    }
    Ok((sum / data.len() as f64).sqrt())
}

/// Shortest fixed format that round-trips: scientific with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::Prng;
    use proptest::prelude::*;

    fn square_points() -> TrainingSet {
        TrainingSet::new(vec![(0.1, 0.01), (0.5, 0.25), (0.9, 0.81)]).unwrap()
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = Network::zeros(&DEFAULT_LAYER_SIZES).unwrap();
        for x in [-3.0, 0.0, 0.4, 17.0] {
            assert_eq!(net.forward(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn one_one_one_unit_weights() {
        let net = Network::from_params(&[1, 1, 1], &[1.0, 0.0, 1.0, 0.0]).unwrap();
        // tanh(tanh(1)) from a 40-digit evaluation.
        let expected = 0.642_014_992_011_999_8;
        assert!((net.forward(1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_non_finite_input() {
        let net = Network::zeros(&DEFAULT_LAYER_SIZES).unwrap();
        assert!(net.forward(f64::NAN).is_err());
        assert!(net.forward(f64::INFINITY).is_err());
    }

    #[test]
    fn forward_rejects_wide_input_layer() {
        let net = Network::zeros(&[2, 3, 1]).unwrap();
        assert!(net.forward(0.5).is_err());
        assert_eq!(net.forward_vec(&[0.5, 0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn bad_sizes_rejected() {
        assert!(Network::zeros(&[1]).is_err());
        assert!(Network::zeros(&[1, 0, 1]).is_err());
    }

    #[test]
    fn rms_of_zero_net_on_square_points() {
        let net = Network::zeros(&DEFAULT_LAYER_SIZES).unwrap();
        let expected = ((0.01f64 * 0.01 + 0.25 * 0.25 + 0.81 * 0.81) / 3.0).sqrt();
        let got = rms_error(&net, &square_points()).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn rms_single_point_is_abs_residual() {
        let net = Network::zeros(&[1, 2, 1]).unwrap();
        let data = TrainingSet::new(vec![(0.3, -0.7)]).unwrap();
        assert_eq!(rms_error(&net, &data).unwrap(), 0.7);
    }

    #[test]
    fn rms_zero_for_exact_fit() {
        let net = Network::from_params(&[1, 1, 1], &[0.5, 0.1, 2.0, -0.3]).unwrap();
        let pts = [0.0, 0.25, 0.8]
            .iter()
            .map(|&x| (x, net.forward(x).unwrap()))
            .collect();
        let data = TrainingSet::new(pts).unwrap();
        assert_eq!(rms_error(&net, &data).unwrap(), 0.0);
    }

    #[test]
    fn empty_or_non_finite_training_set_rejected() {
        assert!(TrainingSet::new(vec![]).is_err());
        assert!(TrainingSet::new(vec![(0.1, f64::NAN)]).is_err());
    }

    #[test]
    fn bounds_validation() {
        assert!(WeightBounds::new(5.0, 5.0).is_err());
        assert!(WeightBounds::new(1.0, -1.0).is_err());
        assert!(WeightBounds::new(f64::NEG_INFINITY, 0.0).is_err());
        let b = WeightBounds::symmetric(12.0).unwrap();
        assert_eq!((b.min(), b.max(), b.half_width()), (-12.0, 12.0, 12.0));
    }

    #[test]
    fn init_random_in_bounds_and_deterministic() {
        let bounds = WeightBounds::new(-1.0, 1.0).unwrap();
        let a = Network::init_random(&DEFAULT_LAYER_SIZES, &bounds, &mut Prng::new(11)).unwrap();
        let b = Network::init_random(&DEFAULT_LAYER_SIZES, &bounds, &mut Prng::new(11)).unwrap();
        assert!(a.within(&bounds));
        assert_eq!(a.params(), b.params());
        assert_eq!(a.param_count(), 13);
    }

    #[test]
    fn init_random_draw_order_is_canonical() {
        let bounds = WeightBounds::new(-2.0, 2.0).unwrap();
        let net = Network::init_random(&[1, 2, 1], &bounds, &mut Prng::new(4)).unwrap();
        let mut rng = Prng::new(4);
        let expected: Vec<f64> = (0..7).map(|_| -2.0 + rng.next_unit() * 4.0).collect();
        assert_eq!(net.params(), expected);
        // w[0][0][0], b[0][0], w[0][1][0], b[0][1], w[1][0][0], w[1][0][1], b[1][0]
        assert_eq!(net.layers()[0].weight(1, 0), expected[2]);
        assert_eq!(net.layers()[1].bias(0), expected[6]);
    }

    #[test]
    fn param_mut_matches_canonical_order() {
        let mut net = Network::zeros(&[1, 3, 2]).unwrap();
        for i in 0..net.param_count() {
            *net.param_mut(i).unwrap() = i as f64;
        }
        assert_eq!(
            net.params(),
            (0..net.param_count()).map(|i| i as f64).collect::<Vec<_>>()
        );
        assert!(net.param_mut(net.param_count()).is_none());
    }

    #[test]
    fn text_format_header_and_lines() {
        let net = Network::from_params(&[1, 1, 1], &[0.1, -2.5, 3.0, 1e-300]).unwrap();
        let text = net.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1 1 1");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "1.0000000000000001e-1");
        assert_eq!(Network::from_text(&text).unwrap(), net);
    }

    #[test]
    fn text_format_errors_name_line() {
        let err = Network::from_text("1 1 1\n0.5\nabc\n0\n0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(Network::from_text("1 1 1\n0.5\n").is_err());
        assert!(Network::from_text("").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            params in proptest::collection::vec(-1e6f64..1e6, 13)
        ) {
            let net = Network::from_params(&DEFAULT_LAYER_SIZES, &params).unwrap();
            let back = Network::from_text(&net.to_text()).unwrap();
            prop_assert_eq!(back.params(), params);
        }

        #[test]
        fn forward_strictly_inside_unit_interval(
            params in proptest::collection::vec(-1.0f64..1.0, 13),
            x in -1.0f64..1.0,
        ) {
            let net = Network::from_params(&DEFAULT_LAYER_SIZES, &params).unwrap();
            let y = net.forward(x).unwrap();
            prop_assert!(y > -1.0 && y < 1.0);
            prop_assert_eq!(y.to_bits(), net.forward(x).unwrap().to_bits());
        }

        #[test]
        fn forward_bounded_for_any_finite_params(
            params in proptest::collection::vec(-1e3f64..1e3, 13),
            x in -1e3f64..1e3,
        ) {
            let net = Network::from_params(&DEFAULT_LAYER_SIZES, &params).unwrap();
            let y = net.forward(x).unwrap();
            prop_assert!((-1.0..=1.0).contains(&y));
        }

        #[test]
        fn rms_matches_explicit_formula(
            params in proptest::collection::vec(-3.0f64..3.0, 13),
            pts in proptest::collection::vec((0.0f64..1.0, -1.0f64..1.0), 1..8),
        ) {
            let net = Network::from_params(&DEFAULT_LAYER_SIZES, &params).unwrap();
            let data = TrainingSet::new(pts.clone()).unwrap();
            let rms = rms_error(&net, &data).unwrap();
            prop_assert!(rms >= 0.0);

            // Appending a point whose residual equals the current RMS leaves it unchanged.
            let (x0, _) = pts[0];
            let y_extra = net.forward(x0).unwrap() - rms;
            let mut more = pts.clone();
            more.push((x0, y_extra));
            let residuals: Vec<f64> = more
                .iter()
                .map(|&(x, y)| net.forward(x).unwrap() - y)
                .collect();
            let explicit = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
            let rms_more = rms_error(&net, &TrainingSet::new(more).unwrap()).unwrap();
            prop_assert!((rms_more - explicit).abs() < 1e-12);
            prop_assert!((rms_more - rms).abs() < 1e-12);
        }
    }
}
