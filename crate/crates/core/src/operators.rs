//! DeepONet (lifted and plain), the cutting network, and their composition.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{region_label, ENCODE_SCALE};
use crate::numerics::{Activation, MlpParams};
use crate::problems::Domain;

/// Rows evaluated per network call when predicting on a grid.
const PREDICT_CHUNK: usize = 4096;

const MIN_SCALE: f64 = 1e-8;

/// Per-feature affine map `v -> (v - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(width: usize) -> Self {
        Self {
            mean: vec![0.0; width],
            scale: vec![1.0; width],
        }
    }

    /// Population mean and standard deviation of each column; near-constant
    /// columns keep scale 1.
    pub fn fit<'a>(width: usize, rows: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut acc = StandardizerFit::new(width);
        rows.into_iter().for_each(|r| acc.push(r));
        acc.finish()
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
    }

    pub fn invert(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = *v * s + m;
        }
    }

    fn apply_rows(&self, a: &mut Array2<f64>) {
        for mut row in a.rows_mut() {
            self.apply(row.as_slice_mut().expect("standard layout"));
        }
    }
}

/// Streaming column statistics (Welford).
#[derive(Debug, Clone)]
pub struct StandardizerFit {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl StandardizerFit {
    pub fn new(width: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; width],
            m2: vec![0.0; width],
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((v, m), m2) in row.iter().zip(&mut self.mean).zip(&mut self.m2) {
            let d = v - *m;
            *m += d / n;
            *m2 += d * (v - *m);
        }
    }

    /// Shares one mean and variance across `cols`, as if they were a single
    /// feature observed `cols.len()` times per row.
    pub fn pool(mut self, cols: std::ops::Range<usize>) -> Self {
        let k = cols.len();
        if k < 2 {
            return self;
        }
        let n = self.n as f64;
        let mean = self.mean[cols.clone()].iter().sum::<f64>() / k as f64;
        let m2: f64 = cols
            .clone()
            .map(|c| self.m2[c] + n * (self.mean[c] - mean).powi(2))
            .sum::<f64>()
            / k as f64;
        for c in cols {
            self.mean[c] = mean;
            self.m2[c] = m2;
        }
        self
    }

    pub fn finish(self) -> Standardizer {
        let n = self.n.max(1) as f64;
        let scale = self
            .m2
            .iter()
            .map(|m2| {
                let s = (m2 / n).sqrt();
                if s > MIN_SCALE {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer {
            mean: self.mean,
            scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    /// Trunk sees the coordinates plus a region label.
    Lifted,
    /// Trunk sees the coordinates only.
    Baseline,
}

/// Hidden widths of branch and trunk and the shared latent width `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepONetArch {
    pub branch_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    pub latent: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl DeepONetArch {
    pub fn uniform(width: usize, depth: usize, latent: usize) -> Self {
        Self {
            branch_hidden: vec![width; depth],
            trunk_hidden: vec![width; depth],
            latent,
            activation: Activation::Tanh,
        }
    }
}

/// `G(u)(y) = branch(u) . trunk(y)`, with standardized inputs and output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepONetModel {
    pub mode: OperatorMode,
    pub coord_dims: usize,
    pub branch: MlpParams,
    pub trunk: MlpParams,
    pub branch_in: Standardizer,
    pub trunk_in: Standardizer,
    pub output: Standardizer,
}

impl DeepONetModel {
    /// Random initialization with identity standardization; the branch
    /// output layer starts at zero, so the initial prediction is the output mean.
    pub fn init(
        arch: &DeepONetArch,
        mode: OperatorMode,
        sensors: usize,
        coord_dims: usize,
        seed: u64,
    ) -> Result<Self> {
        let query = coord_dims + usize::from(mode == OperatorMode::Lifted);
        let sizes = |input: usize, hidden: &[usize]| {
            let mut v = vec![input];
            v.extend_from_slice(hidden);
            v.push(arch.latent);
            v
        };
        let mut branch = MlpParams::init(&sizes(sensors, &arch.branch_hidden), arch.activation, seed)?;
        // a zero last branch layer starts the operator at the target mean
        if let Some(w) = branch.weights_mut().last_mut() {
            w.fill(0.0);
        }
        let trunk = MlpParams::init(
            &sizes(query, &arch.trunk_hidden),
            arch.activation,
            seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        )?;
        Self::from_parts(
            mode,
            coord_dims,
            branch,
            trunk,
            Standardizer::identity(sensors),
            Standardizer::identity(query),
            Standardizer::identity(1),
        )
    }

    pub fn from_parts(
        mode: OperatorMode,
        coord_dims: usize,
        branch: MlpParams,
        trunk: MlpParams,
        branch_in: Standardizer,
        trunk_in: Standardizer,
        output: Standardizer,
    ) -> Result<Self> {
        let model = Self {
            mode,
            coord_dims,
            branch,
            trunk,
            branch_in,
            trunk_in,
            output,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks widths after construction or loading.
    pub fn validate(&self) -> Result<()> {
        if self.branch.output_width() != self.trunk.output_width() {
            return Err(Error::Shape(format!(
                "branch width {} differs from trunk width {}",
                self.branch.output_width(),
                self.trunk.output_width()
            )));
        }
        if self.trunk.input_width() != self.query_width() {
            return Err(Error::Shape(format!(
                "{:?} trunk takes {} inputs, expected {}",
                self.mode,
                self.trunk.input_width(),
                self.query_width()
            )));
        }
        if self.branch_in.width() != self.branch.input_width()
            || self.trunk_in.width() != self.trunk.input_width()
            || self.output.width() != 1
        {
            return Err(Error::Shape("standardizer widths do not match the networks".into()));
        }
        Ok(())
    }

    pub fn sensor_count(&self) -> usize {
        self.branch.input_width()
    }

    pub fn latent(&self) -> usize {
        self.branch.output_width()
    }

    pub fn query_width(&self) -> usize {
        self.coord_dims + usize::from(self.mode == OperatorMode::Lifted)
    }

    /// Branch output for raw sensor values.
    pub fn branch_features(&self, sensors: &[f64]) -> Result<Vec<f64>> {
        if sensors.len() != self.sensor_count() {
            return Err(Error::Shape(format!(
                "{} sensor values, model expects {}",
                sensors.len(),
                self.sensor_count()
            )));
        }
        let mut s = sensors.to_vec();
        self.branch_in.apply(&mut s);
        self.branch.forward(&s)
    }

    /// De-standardized predictions for raw query rows.
    pub fn predict(&self, sensors: &[f64], queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        if queries.ncols() != self.query_width() {
            return Err(Error::Shape(format!(
                "queries have {} columns, model expects {}",
                queries.ncols(),
                self.query_width()
            )));
        }
        let b = ndarray::Array1::from(self.branch_features(sensors)?);
        let mut out = Vec::with_capacity(queries.nrows());
        for chunk in queries.axis_chunks_iter(Axis(0), PREDICT_CHUNK) {
            let mut q = chunk.to_owned();
            self.trunk_in.apply_rows(&mut q);
            let t = self.trunk.forward_batch(q.view())?;
            out.extend(t.dot(&b).iter().map(|&v| v * self.output.scale[0] + self.output.mean[0]));
        }
        Ok(out)
    }
}

/// Full pipeline for a single query: standardize, `branch . trunk`, de-standardize.
pub fn deeponet_eval(model: &DeepONetModel, sensors: &[f64], query: &[f64]) -> Result<f64> {
    let q = ArrayView2::from_shape((1, query.len()), query).expect("one row");
    Ok(model.predict(sensors, q)?[0])
}

/// Maps sensors (and a time for space-time problems) to sorted front locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuttingNet {
    pub net: MlpParams,
    pub with_time: bool,
    /// Outputs are clamped to `[lo, hi]`.
    pub bounds: (f64, f64),
    pub input: Standardizer,
    pub output: Standardizer,
}

impl CuttingNet {
    pub fn init(
        sensors: usize,
        with_time: bool,
        hidden: &[usize],
        dis_n: usize,
        bounds: (f64, f64),
        seed: u64,
    ) -> Result<Self> {
        let input = sensors + usize::from(with_time);
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(dis_n);
        let net = MlpParams::init(&sizes, Activation::Tanh, seed)?;
        Ok(Self {
            net,
            with_time,
            bounds,
            input: Standardizer::identity(input),
            output: Standardizer::identity(dis_n),
        })
    }

    pub fn dis_n(&self) -> usize {
        self.net.output_width()
    }

    pub fn sensor_count(&self) -> usize {
        self.net.input_width() - usize::from(self.with_time)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.width() != self.net.input_width() || self.output.width() != self.net.output_width() {
            return Err(Error::Shape("standardizer widths do not match the cutting net".into()));
        }
        if !(self.bounds.0 < self.bounds.1) {
            return Err(Error::Shape(format!("empty bounds {:?}", self.bounds)));
        }
        Ok(())
    }
}

/// Sorted, clamped front locations.
pub fn cutnet_eval(cnet: &CuttingNet, sensors: &[f64], t: Option<f64>) -> Result<Vec<f64>> {
    if sensors.len() != cnet.sensor_count() || t.is_some() != cnet.with_time {
        return Err(Error::Shape(format!(
            "cutting net expects {} sensors {} a time, got {} {}",
            cnet.sensor_count(),
            if cnet.with_time { "and" } else { "without" },
            sensors.len(),
            if t.is_some() { "with a time" } else { "without a time" }
        )));
    }
    let mut input = sensors.to_vec();
    input.extend(t);
    cnet.input.apply(&mut input);
    let mut out = cnet.net.forward(&input)?;
    cnet.output.invert(&mut out);
    out.sort_by(f64::total_cmp);
    for v in &mut out {
        *v = v.clamp(cnet.bounds.0, cnet.bounds.1);
    }
    Ok(out)
}

/// Anything that can say where the fronts of a sample are.
pub trait FrontModel {
    fn predict_fronts(&self, sensors: &[f64], t: Option<f64>) -> Result<Vec<f64>>;
}

/// Anything that evaluates a solution in lifted coordinates. Query rows are
/// the point coordinates followed by the encoded label.
pub trait LiftedModel {
    fn predict_lifted(&self, sensors: &[f64], queries: ArrayView2<f64>) -> Result<Vec<f64>>;
}

impl FrontModel for CuttingNet {
    fn predict_fronts(&self, sensors: &[f64], t: Option<f64>) -> Result<Vec<f64>> {
        cutnet_eval(self, sensors, t)
    }
}

impl<F> FrontModel for F
where
    F: Fn(&[f64], Option<f64>) -> Result<Vec<f64>>,
{
    fn predict_fronts(&self, sensors: &[f64], t: Option<f64>) -> Result<Vec<f64>> {
        self(sensors, t)
    }
}

impl LiftedModel for DeepONetModel {
    fn predict_lifted(&self, sensors: &[f64], queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        if self.mode != OperatorMode::Lifted {
            return Err(Error::Usage("baseline model has no label input".into()));
        }
        self.predict(sensors, queries)
    }
}

impl<F> LiftedModel for F
where
    F: Fn(&[f64], ArrayView2<f64>) -> Result<Vec<f64>>,
{
    fn predict_lifted(&self, sensors: &[f64], queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        self(sensors, queries)
    }
}

/// A prediction with genuine jumps: every point carries the region it was
/// evaluated in, and the fronts that separated the regions are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSolution {
    pub domain: Domain,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
    pub fronts: Vec<Vec<f64>>,
}

fn plain_queries(domain: &Domain, extra: usize) -> Array2<f64> {
    let d = domain.coord_dims();
    let n = domain.slice_len();
    let mut q = Array2::zeros((domain.len(), d + extra));
    for j in 0..domain.n_slices() {
        for i in 0..n {
            let c = domain.coords(j, i);
            let mut row = q.row_mut(j * n + i);
            for (k, v) in c.into_iter().enumerate() {
                row[k] = v;
            }
        }
    }
    q
}

/// Predicts fronts for each slice, labels every grid point against them, and
/// evaluates the lifted operator at the labelled points.
pub fn cut_predict<F, L>(fronts: &F, op: &L, sensors: &[f64], domain: &Domain) -> Result<PiecewiseSolution>
where
    F: FrontModel + ?Sized,
    L: LiftedModel + ?Sized,
{
    let axis = domain.front_axis();
    let d = domain.coord_dims();
    let mut queries = plain_queries(domain, 1);
    let mut labels = Vec::with_capacity(domain.len());
    let mut all_fronts = Vec::with_capacity(domain.n_slices());
    for j in 0..domain.n_slices() {
        let f = fronts.predict_fronts(sensors, domain.slice_time(j))?;
        for i in 0..axis.n {
            let c = region_label(axis.point(i), &f);
            queries[[j * axis.n + i, d]] = c as f64 * ENCODE_SCALE;
            labels.push(c as u8);
        }
        all_fronts.push(f);
    }
    let values = op.predict_lifted(sensors, queries.view())?;
    Ok(PiecewiseSolution {
        domain: *domain,
        values,
        labels,
        fronts: all_fronts,
    })
}

impl PiecewiseSolution {
    /// Right minus left one-sided limit at each front, evaluated by querying
    /// the operator at the front with the two adjacent labels.
    pub fn front_jumps<L: LiftedModel + ?Sized>(&self, op: &L, sensors: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = self.domain.coord_dims();
        let mut rows = vec![];
        for (j, fronts) in self.fronts.iter().enumerate() {
            for (k, &f) in fronts.iter().enumerate() {
                for label in [k, k + 1] {
                    let mut r = vec![f];
                    r.extend(self.domain.slice_time(j));
                    r.push(label as f64 * ENCODE_SCALE);
                    rows.extend(r);
                }
            }
        }
        let q = Array2::from_shape_vec((rows.len() / (d + 1), d + 1), rows)
            .map_err(|e| Error::Shape(e.to_string()))?;
        let v = op.predict_lifted(sensors, q.view())?;
        let mut pairs = v.chunks(2).map(|p| p[1] - p[0]);
        Ok(self
            .fronts
            .iter()
            .map(|f| pairs.by_ref().take(f.len()).collect())
            .collect())
    }
}

/// Plain DeepONet prediction on every grid point.
pub fn baseline_predict(model: &DeepONetModel, sensors: &[f64], domain: &Domain) -> Result<Vec<f64>> {
    if model.mode != OperatorMode::Baseline {
        return Err(Error::Usage("lifted model needs fronts; use cut_predict".into()));
    }
    model.predict(sensors, plain_queries(domain, 0).view())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{extract_jumps, filter_smeared, JumpConfig};
    use crate::problems::{advection_exact, burgers_exact, AdvectionIC, RiemannIC};
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    fn arch(p: usize) -> DeepONetArch {
        DeepONetArch::uniform(8, 2, p)
    }

    #[test]
    fn zero_branch_gives_output_mean() {
        let mut m = DeepONetModel::init(&arch(4), OperatorMode::Lifted, 5, 2, 1).unwrap();
        for w in m.branch.weights_mut() {
            w.fill(0.0);
        }
        for b in m.branch.biases_mut() {
            b.fill(0.0);
        }
        m.output = Standardizer { mean: vec![0.7], scale: vec![3.0] };
        for q in [[0.1, 0.2, 0.0], [5.0, -1.0, 2.0]] {
            assert_eq!(deeponet_eval(&m, &[1.0; 5], &q).unwrap(), 0.7);
        }
    }

    #[test]
    fn hand_built_product() {
        // branch = 2, trunk(q) = q[0]
        let branch = MlpParams::from_parts(vec![array![[0.0]]], vec![Array1::from(vec![2.0])], Activation::Tanh).unwrap();
        let trunk = MlpParams::from_parts(vec![array![[1.0, 0.0]]], vec![Array1::from(vec![0.0])], Activation::Tanh).unwrap();
        let m = DeepONetModel::from_parts(
            OperatorMode::Baseline,
            2,
            branch,
            trunk,
            Standardizer::identity(1),
            Standardizer::identity(2),
            Standardizer::identity(1),
        )
        .unwrap();
        assert_eq!(deeponet_eval(&m, &[9.0], &[0.25, 3.0]).unwrap(), 0.5);
        assert_eq!(deeponet_eval(&m, &[9.0], &[-1.5, 3.0]).unwrap(), -3.0);
    }

    #[test]
    fn dimension_checks() {
        let m = DeepONetModel::init(&arch(4), OperatorMode::Lifted, 5, 2, 1).unwrap();
        assert!(matches!(deeponet_eval(&m, &[0.0; 4], &[0.0; 3]), Err(Error::Shape(_))));
        assert!(matches!(deeponet_eval(&m, &[0.0; 5], &[0.0; 2]), Err(Error::Shape(_))));
        let b = DeepONetModel::init(&arch(4), OperatorMode::Baseline, 5, 2, 1).unwrap();
        assert_eq!(b.trunk.input_width(), 2);
        assert_eq!(m.trunk.input_width(), 3);
        let dom = Domain::Time { t: crate::problems::UniformGrid::new(0.0, 1.0, 4).unwrap() };
        assert!(matches!(baseline_predict(&m, &[0.0; 5], &dom), Err(Error::Usage(_))));
        assert!(matches!(b.predict_lifted(&[0.0; 5], Array2::zeros((1, 3)).view()), Err(Error::Usage(_))));
    }

    #[test]
    fn batch_matches_single_queries() {
        let m = DeepONetModel::init(&arch(6), OperatorMode::Lifted, 3, 2, 7).unwrap();
        let s = [0.3, -0.2, 1.0];
        let q = array![[0.1, 0.0, 0.0], [0.5, 0.2, 1.0], [0.9, 0.25, 2.0]];
        let batch = m.predict(&s, q.view()).unwrap();
        for (r, v) in q.rows().into_iter().zip(batch) {
            assert_eq!(deeponet_eval(&m, &s, r.as_slice().unwrap()).unwrap(), v);
        }
    }

    #[test]
    fn cutnet_shape_errors() {
        let c = CuttingNet::init(4, true, &[6], 2, (0.0, 1.0), 3).unwrap();
        assert!(cutnet_eval(&c, &[0.0; 4], None).is_err());
        assert!(cutnet_eval(&c, &[0.0; 3], Some(0.1)).is_err());
        let c = CuttingNet::init(4, false, &[6], 2, (0.0, 1.0), 3).unwrap();
        assert!(cutnet_eval(&c, &[0.0; 4], Some(0.1)).is_err());
        assert_eq!(cutnet_eval(&c, &[0.0; 4], None).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn cutnet_output_sorted_and_bounded(seed in 0u64..1000, sensors in proptest::collection::vec(-5.0f64..5.0, 4), t in -1.0f64..2.0, shift in -10.0f64..10.0) {
            let mut c = CuttingNet::init(4, true, &[6, 6], 3, (-1.0, 1.0), seed).unwrap();
            c.output = Standardizer { mean: vec![shift; 3], scale: vec![4.0; 3] };
            let f = cutnet_eval(&c, &sensors, Some(t)).unwrap();
            prop_assert!(f.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.iter().all(|v| (-1.0..=1.0).contains(v)));
        }

        #[test]
        fn standardizer_round_trip(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 3), 1..20)) {
            let s = Standardizer::fit(3, rows.iter().map(Vec::as_slice));
            for r in &rows {
                let mut v = r.clone();
                s.apply(&mut v);
                s.invert(&mut v);
                for (a, b) in v.iter().zip(r) {
                    prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn standardizer_statistics() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(2, rows.iter().map(Vec::as_slice));
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        let mut v = vec![3.0, 6.0];
        s.apply(&mut v);
        assert_eq!(v, vec![1.0, 1.0]);
    }

    #[test]
    fn composition_identity_on_advection() {
        let ic = AdvectionIC::new(0.55, 0.33, 0.17).unwrap();
        let field = advection_exact(&ic, 400, 12, 50).unwrap();
        let oracle_fronts = |_: &[f64], t: Option<f64>| -> Result<Vec<f64>> { Ok(ic.fronts(t.unwrap()).to_vec()) };
        let h = ic.height;
        let oracle_op = move |_: &[f64], q: ArrayView2<f64>| -> Result<Vec<f64>> {
            Ok(q.rows().into_iter().map(|r| if r[2] == 1.0 { h } else { 0.0 }).collect())
        };
        let sol = cut_predict(&oracle_fronts, &oracle_op, &field.sensors, &field.domain).unwrap();
        assert_eq!(sol.values, field.values);
        let jumps = sol.front_jumps(&oracle_op, &field.sensors).unwrap();
        assert!(jumps.iter().all(|j| j == &vec![h, -h]));
    }

    #[test]
    fn composition_identity_on_burgers() {
        let ic = RiemannIC::new(1.3, -0.6);
        let (field, path) = burgers_exact(&ic, 300, 25, 50).unwrap();
        let fronts = |_: &[f64], t: Option<f64>| -> Result<Vec<f64>> { Ok(vec![path.position(t.unwrap())]) };
        let op = |_: &[f64], q: ArrayView2<f64>| -> Result<Vec<f64>> {
            Ok(q.rows().into_iter().map(|r| if r[2] == 0.0 { 1.3 } else { 0.0 }).collect())
        };
        let sol = cut_predict(&fronts, &op, &field.sensors, &field.domain).unwrap();
        let disc = extract_jumps(&field, &JumpConfig::new(1)).unwrap();
        let mask = filter_smeared(&field, &disc, 1);
        for (k, (p, t)) in sol.values.iter().zip(&field.values).enumerate() {
            if !mask.mask[k] {
                assert_eq!(p, t);
            }
        }
        assert_eq!(sol.values, field.values);
    }

    #[test]
    fn front_on_grid_point_takes_right_value() {
        let t = crate::problems::UniformGrid::new(0.0, 1.0, 11).unwrap();
        let dom = Domain::Time { t };
        let fronts = |_: &[f64], _: Option<f64>| -> Result<Vec<f64>> { Ok(vec![t.point(4)]) };
        let op = |_: &[f64], q: ArrayView2<f64>| -> Result<Vec<f64>> { Ok(q.column(1).to_vec()) };
        let sol = cut_predict(&fronts, &op, &[], &dom).unwrap();
        assert_eq!(sol.values[3], 0.0);
        assert_eq!(sol.values[4], 1.0);
    }

    #[test]
    fn checkpoint_serde_round_trip() {
        let m = DeepONetModel::init(&arch(3), OperatorMode::Lifted, 4, 1, 11).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: DeepONetModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
