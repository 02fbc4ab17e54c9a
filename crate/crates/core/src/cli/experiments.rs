//! Named experiments. Each instance draws its randomness from
//! `stream(seed, index * STRIDE + role)`, so records depend only on the
//! seed, the instance index and the parameters, never on run order.

use clap::ValueEnum;

use crate::diagnostics::{qlp, r_factor, rr_conditions, rvalue_ratios, FirstFactorization, RankRevealReport};
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::lstsq::{solve, LsSolution, Method};
use crate::matgen::{gaussian_vector, Family};
use crate::matrix::RealMatrix;
use crate::rng::{stream, Rng};
use crate::rurv::{haar_sample, RosOptions};
use crate::transforms::{column_norm_stats, ros_apply, ros_sample, ColumnNormStats, RosMode};

use super::config::{parse_sizes, FamilyArgs, FamilyName};
use super::output::{num, opt_num, Table};

/// Streams reserved per instance.
pub const STRIDE: u64 = 16;
const ROLE_MATRIX: u64 = 0;
const ROLE_RHS: u64 = 1;
const ROLE_FIRST_BACKEND: u64 = 2;

/// L-value or singular-value ratios at least this large mark a boundary.
pub const BOUNDARY_RATIO: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpName {
    MixNorms,
    RrScaling,
    Rvalues,
    Qlp,
    LsBench,
}

pub fn instance_rng(seed: u64, index: u64, role: u64) -> Rng {
    stream(seed, index * STRIDE + role)
}

fn backend_rng(seed: u64, index: u64, first: FirstFactorization) -> Rng {
    let pos = FirstFactorization::ALL.iter().position(|f| *f == first).expect("listed") as u64;
    instance_rng(seed, index, ROLE_FIRST_BACKEND + pos)
}

fn method_rng(seed: u64, index: u64, method: Method) -> Rng {
    let pos = Method::ALL.iter().position(|m| *m == method).expect("listed") as u64;
    instance_rng(seed, index, ROLE_FIRST_BACKEND + pos)
}

/// The instance's matrix and its singular values (known or computed).
pub fn instance_matrix(family: &Family, seed: u64, index: u64) -> Result<(RealMatrix, Vec<f64>)> {
    let g = family.generate_with(&mut instance_rng(seed, index, ROLE_MATRIX))?;
    let sigma = match g.sigma {
        Some(s) => s,
        None => singular_values(&g.a)?,
    };
    Ok((g.a, sigma))
}

/// Column-norm statistics before and after each mixing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixNormRecord {
    pub pre: ColumnNormStats,
    pub haar: ColumnNormStats,
    pub ros: ColumnNormStats,
}

pub fn mix_norm_instance(family: &Family, seed: u64, index: u64, num_mixes: usize) -> Result<MixNormRecord> {
    let a = family.generate_with(&mut instance_rng(seed, index, ROLE_MATRIX))?.a;
    let n = a.cols();
    let w = haar_sample(n, &mut instance_rng(seed, index, ROLE_FIRST_BACKEND))?;
    let haar = a.matmul_t(&w)?;
    let v = ros_sample(n, num_mixes, &mut instance_rng(seed, index, ROLE_FIRST_BACKEND + 1))?;
    let ros = ros_apply(&v, &a, RosMode::RightTranspose)?;
    Ok(MixNormRecord {
        pre: column_norm_stats(&a),
        haar: column_norm_stats(&haar),
        ros: column_norm_stats(&ros),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RrRecord {
    pub backend: FirstFactorization,
    pub report: RankRevealReport,
}

/// Default split: `m - 1` for Kahan, the gap position for gap matrices,
/// half the smaller dimension otherwise.
pub fn default_split(family: &Family) -> usize {
    match *family {
        Family::Kahan { m, .. } => m - 1,
        Family::Gap { k, .. } => k,
        _ => {
            let (m, n) = family_shape(family);
            m.min(n) / 2
        }
    }
}

pub fn family_shape(family: &Family) -> (usize, usize) {
    match *family {
        Family::Kahan { m, .. } | Family::Gap { m, .. } | Family::DevilsStairs { m, .. } => (m, m),
        Family::Correlated { m, n, .. }
        | Family::Condition { m, n, .. }
        | Family::HeavyTail { m, n }
        | Family::PrescribedSigma { m, n, .. } => (m, n),
    }
}

/// `c^3 (1 + c)^(m - 4) / (2 s)` with `s = sqrt(1 - c^2)`: the Kahan ratio
/// growth that QRCP exhibits at `k = m - 1`.
pub fn kahan_bound(m: usize, c: f64) -> f64 {
    let s = (1.0 - c * c).sqrt();
    0.5 * c.powi(3) * (1.0 + c).powi(m as i32 - 4) / s
}

pub fn rr_instance(
    family: &Family,
    k: usize,
    backends: &[FirstFactorization],
    seed: u64,
    index: u64,
    num_mixes: usize,
) -> Result<Vec<RrRecord>> {
    let (a, sigma) = instance_matrix(family, seed, index)?;
    backends
        .iter()
        .map(|&backend| {
            let r = r_factor(&a, backend, num_mixes, &mut backend_rng(seed, index, backend))?;
            Ok(RrRecord {
                backend,
                report: rr_conditions(&sigma, &r, k)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RvalueRecord {
    pub backend: FirstFactorization,
    pub ratios: Vec<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl RvalueRecord {
    pub fn within_bounds(&self, slack: f64) -> bool {
        self.ratios
            .iter()
            .all(|&q| q >= self.lower_bound * (1.0 - slack) && q <= self.upper_bound * (1.0 + slack))
    }
}

pub fn rvalue_instance(
    family: &Family,
    backends: &[FirstFactorization],
    seed: u64,
    index: u64,
    num_mixes: usize,
) -> Result<Vec<RvalueRecord>> {
    let (a, sigma) = instance_matrix(family, seed, index)?;
    backends
        .iter()
        .map(|&backend| {
            let r = r_factor(&a, backend, num_mixes, &mut backend_rng(seed, index, backend))?;
            let p = r.rows().min(r.cols());
            let rep = rvalue_ratios(&r.submatrix(0, p, 0, p), &sigma)?;
            Ok(RvalueRecord {
                backend,
                ratios: rep.ratios,
                lower_bound: rep.lower_bound,
                upper_bound: rep.upper_bound,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QlpRecord {
    pub backend: FirstFactorization,
    pub l_values: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl QlpRecord {
    /// `L_i / L_{i+1}` for 0-based `i`.
    pub fn l_ratio(&self, i: usize) -> f64 {
        self.l_values[i] / self.l_values[i + 1]
    }

    pub fn sigma_ratio(&self, i: usize) -> f64 {
        self.sigma[i] / self.sigma[i + 1]
    }

    /// 0-based indices `i` with `sigma_i / sigma_{i+1} >= BOUNDARY_RATIO`.
    pub fn boundaries(&self) -> Vec<usize> {
        (0..self.l_values.len().min(self.sigma.len()).saturating_sub(1))
            .filter(|&i| self.sigma_ratio(i) >= BOUNDARY_RATIO)
            .collect()
    }
}

pub fn qlp_instance(
    family: &Family,
    backends: &[FirstFactorization],
    seed: u64,
    index: u64,
    num_mixes: usize,
) -> Result<Vec<QlpRecord>> {
    let (a, sigma) = instance_matrix(family, seed, index)?;
    backends
        .iter()
        .map(|&backend| {
            let rep = qlp(&a, backend, num_mixes, &mut backend_rng(seed, index, backend))?;
            Ok(QlpRecord {
                backend,
                l_values: rep.l_values,
                sigma: sigma.clone(),
            })
        })
        .collect()
}

/// Per-method outcome of one least-squares instance.
#[derive(Clone, Debug)]
pub struct LsRecord {
    pub method: Method,
    pub outcome: std::result::Result<LsSolution, String>,
}

/// Solves `A x = b` with every method. Numerical failures are recorded per
/// method; other errors abort.
pub fn solve_all(
    a: &RealMatrix,
    b: &[f64],
    methods: &[Method],
    opts: RosOptions,
    seed: u64,
    index: u64,
) -> Result<Vec<LsRecord>> {
    methods
        .iter()
        .map(|&method| {
            let outcome = match solve(a, b, method, opts, &mut method_rng(seed, index, method)) {
                Ok(sol) => Ok(sol),
                Err(e) if e.is_numerical() => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(LsRecord { method, outcome })
        })
        .collect()
}

/// Generated matrix with a standard normal right-hand side.
pub fn ls_instance(
    family: &Family,
    methods: &[Method],
    opts: RosOptions,
    seed: u64,
    index: u64,
) -> Result<Vec<LsRecord>> {
    let a = family.generate_with(&mut instance_rng(seed, index, ROLE_MATRIX))?.a;
    let b = gaussian_vector(a.rows(), &mut instance_rng(seed, index, ROLE_RHS));
    solve_all(&a, &b, methods, opts, seed, index)
}

/// Default method set for the shape of `a`.
pub fn default_methods(m: usize, n: usize) -> Vec<Method> {
    if m < n {
        Method::UNDERDETERMINED.to_vec()
    } else {
        vec![Method::QrOverdet, Method::Qrcp, Method::RurvRosOverdet]
    }
}

/// `residual, norm, elapsed, mix, factor, solve, status` cells.
pub fn ls_cells(rec: &LsRecord, timings: bool) -> Vec<String> {
    match &rec.outcome {
        Ok(sol) => {
            let t = |d: std::time::Duration| if timings { num(d.as_secs_f64()) } else { "NA".into() };
            vec![
                num(sol.residual_norm),
                num(sol.solution_norm),
                t(sol.timings.total()),
                t(sol.timings.mix),
                t(sol.timings.factor),
                t(sol.timings.solve),
                "ok".into(),
            ]
        }
        Err(msg) => {
            let mut cells = vec!["NA".to_string(); 6];
            cells.push(format!("failed: {msg}"));
            cells
        }
    }
}

/// Settings shared by all experiment drivers.
pub struct ExpContext<'a> {
    pub seed: u64,
    pub mixes: usize,
    pub presort: bool,
    pub timings: bool,
    pub family: &'a FamilyArgs,
    pub sizes: Option<&'a str>,
    pub reps: usize,
    pub backends: &'a [String],
}

impl ExpContext<'_> {
    fn family_name(&self, default: FamilyName) -> FamilyName {
        self.family.family.unwrap_or(default)
    }

    fn sizes(&self, name: FamilyName, default: &str) -> Result<Vec<usize>> {
        match (self.sizes, self.family.m) {
            (Some(s), _) => parse_sizes(s),
            (None, Some(m)) => Ok(vec![m]),
            (None, None) if name == FamilyName::PrescribedSigma => {
                Ok(vec![family_shape(&self.family.family_at(name, 1)?).1])
            }
            (None, None) => parse_sizes(default),
        }
    }

    fn factorizations(&self, default: &[FirstFactorization]) -> Result<Vec<FirstFactorization>> {
        if self.backends.is_empty() {
            return Ok(default.to_vec());
        }
        self.backends.iter().map(|s| s.parse()).collect()
    }

    fn methods(&self, m: usize, n: usize) -> Result<Vec<Method>> {
        if self.backends.is_empty() {
            return Ok(default_methods(m, n));
        }
        self.backends.iter().map(|s| s.parse()).collect()
    }

    fn check_reps(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("--reps must be at least 1"));
        }
        Ok(())
    }

    /// `(size position, instance, global index)` for every instance.
    fn instances(&self, sizes: &[usize]) -> Vec<(usize, usize, u64)> {
        (0..sizes.len())
            .flat_map(|s| (0..self.reps).map(move |r| (s, r, (s * self.reps + r) as u64)))
            .collect()
    }
}

pub fn run(name: ExpName, ctx: &ExpContext<'_>) -> Result<Table> {
    ctx.check_reps()?;
    match name {
        ExpName::MixNorms => mix_norms_table(ctx),
        ExpName::RrScaling => rr_table(ctx),
        ExpName::Rvalues => rvalues_table(ctx),
        ExpName::Qlp => qlp_table(ctx),
        ExpName::LsBench => ls_table(ctx),
    }
}

fn stats_cells(s: &ColumnNormStats) -> [String; 2] {
    [num(s.mean), num(s.stdev)]
}

fn mix_norms_table(ctx: &ExpContext<'_>) -> Result<Table> {
    let name = ctx.family_name(FamilyName::Heavytail);
    let sizes = ctx.sizes(name, "250")?;
    let mut t = Table::new(&[
        "row", "family", "m", "n", "rep", "backend", "pre_mean", "pre_stdev", "post_mean", "post_stdev",
        "post_below_pre",
    ]);
    for (s, &size) in sizes.iter().enumerate() {
        let family = ctx.family.family_at(name, size)?;
        let (m, n) = family_shape(&family);
        let prefix = |row: &str, rep: &str, backend: &str| -> Vec<String> {
            vec![row.into(), family.name().into(), m.to_string(), n.to_string(), rep.into(), backend.into()]
        };
        let mut recs = Vec::with_capacity(ctx.reps);
        for rep in 0..ctx.reps {
            let rec = mix_norm_instance(&family, ctx.seed, (s * ctx.reps + rep) as u64, ctx.mixes)?;
            for (backend, post) in [("haar", rec.haar), ("ros", rec.ros)] {
                let mut row = prefix("instance", &rep.to_string(), backend);
                row.extend(stats_cells(&rec.pre));
                row.extend(stats_cells(&post));
                row.push(u8::from(post.stdev < rec.pre.stdev).to_string());
                t.push(row);
            }
            recs.push(rec);
        }
        let avg = |f: &dyn Fn(&MixNormRecord) -> f64| num(recs.iter().map(f).sum::<f64>() / recs.len() as f64);
        for backend in ["haar", "ros"] {
            let post = |r: &MixNormRecord| if backend == "haar" { r.haar } else { r.ros };
            let below = recs.iter().filter(|r| post(r).stdev < r.pre.stdev).count();
            let mut row = prefix("mean", "all", backend);
            row.extend([
                avg(&|r| r.pre.mean),
                avg(&|r| r.pre.stdev),
                avg(&|r| post(r).mean),
                avg(&|r| post(r).stdev),
                below.to_string(),
            ]);
            t.push(row);
        }
    }
    Ok(t)
}

fn rr_table(ctx: &ExpContext<'_>) -> Result<Table> {
    let name = ctx.family_name(FamilyName::Kahan);
    let sizes = ctx.sizes(name, "20:200:20")?;
    let backends = ctx.factorizations(&[
        FirstFactorization::Qrcp,
        FirstFactorization::RurvHaar,
        FirstFactorization::RurvRos,
    ])?;
    let mut t = Table::new(&[
        "row", "family", "m", "n", "k", "rep", "backend", "max_ratio_r11", "max_ratio_r22", "min_ratio_r11",
        "min_ratio_r22", "strong_norm", "kahan_bound",
    ]);
    for (s, &size) in sizes.iter().enumerate() {
        let family = ctx.family.family_at(name, size)?;
        let (m, n) = family_shape(&family);
        let k = match family {
            Family::Kahan { .. } | Family::Gap { .. } => default_split(&family),
            _ => ctx.family.k.unwrap_or_else(|| default_split(&family)),
        };
        let bound = match family {
            Family::Kahan { m, c, .. } => Some(kahan_bound(m, c)),
            _ => None,
        };
        let mut all: Vec<RrRecord> = Vec::new();
        for rep in 0..ctx.reps {
            let idx = (s * ctx.reps + rep) as u64;
            for rec in rr_instance(&family, k, &backends, ctx.seed, idx, ctx.mixes)? {
                t.push(rr_row("instance", &family, m, n, k, &rep.to_string(), rec.backend, &rec.report, bound));
                all.push(rec);
            }
        }
        for &backend in &backends {
            let recs: Vec<&RankRevealReport> =
                all.iter().filter(|r| r.backend == backend).map(|r| &r.report).collect();
            let fold = |f: &dyn Fn(&RankRevealReport) -> f64, init: f64, op: fn(f64, f64) -> f64| {
                recs.iter().map(|r| f(r)).fold(init, op)
            };
            let agg = RankRevealReport {
                k,
                max_ratio_r11: fold(&|r| r.max_ratio_r11, f64::NEG_INFINITY, f64::max),
                max_ratio_r22: fold(&|r| r.max_ratio_r22, f64::NEG_INFINITY, f64::max),
                min_ratio_r11: fold(&|r| r.min_ratio_r11, f64::INFINITY, f64::min),
                min_ratio_r22: fold(&|r| r.min_ratio_r22, f64::INFINITY, f64::min),
                strong_norm: fold(&|r| r.strong_norm, f64::NEG_INFINITY, f64::max),
            };
            t.push(rr_row("max", &family, m, n, k, "all", backend, &agg, bound));
        }
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn rr_row(
    row: &str,
    family: &Family,
    m: usize,
    n: usize,
    k: usize,
    rep: &str,
    backend: FirstFactorization,
    r: &RankRevealReport,
    bound: Option<f64>,
) -> Vec<String> {
    vec![
        row.into(),
        family.name().into(),
        m.to_string(),
        n.to_string(),
        k.to_string(),
        rep.into(),
        backend.name().into(),
        num(r.max_ratio_r11),
        num(r.max_ratio_r22),
        num(r.min_ratio_r11),
        num(r.min_ratio_r22),
        num(r.strong_norm),
        opt_num(bound),
    ]
}

fn rvalues_table(ctx: &ExpContext<'_>) -> Result<Table> {
    let name = ctx.family_name(FamilyName::Gap);
    let sizes = ctx.sizes(name, "128")?;
    let backends = ctx.factorizations(&[FirstFactorization::Qrcp])?;
    let mut t = Table::new(&[
        "row", "family", "m", "n", "rep", "backend", "min_ratio", "median_ratio", "max_ratio", "lower_bound",
        "upper_bound", "within_bounds",
    ]);
    for (s, &size) in sizes.iter().enumerate() {
        let family = ctx.family.family_at(name, size)?;
        let (m, n) = family_shape(&family);
        let mut within = vec![0usize; backends.len()];
        for rep in 0..ctx.reps {
            let idx = (s * ctx.reps + rep) as u64;
            for (b, rec) in rvalue_instance(&family, &backends, ctx.seed, idx, ctx.mixes)?.into_iter().enumerate() {
                let ok = rec.within_bounds(1e-10);
                within[b] += usize::from(ok);
                let mut sorted = rec.ratios.clone();
                sorted.sort_by(f64::total_cmp);
                let mid = sorted.len() / 2;
                let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
                t.push(vec![
                    "instance".into(),
                    family.name().into(),
                    m.to_string(),
                    n.to_string(),
                    rep.to_string(),
                    rec.backend.name().into(),
                    num(sorted[0]),
                    num(median),
                    num(sorted[sorted.len() - 1]),
                    num(rec.lower_bound),
                    num(rec.upper_bound),
                    u8::from(ok).to_string(),
                ]);
            }
        }
        for (b, backend) in backends.iter().enumerate() {
            let mut row = vec!["count".into(), family.name().into(), m.to_string(), n.to_string()];
            row.extend(["all".into(), backend.name().into()]);
            row.extend(std::iter::repeat_n("NA".to_string(), 5));
            row.push(within[b].to_string());
            t.push(row);
        }
    }
    Ok(t)
}

fn qlp_table(ctx: &ExpContext<'_>) -> Result<Table> {
    let name = ctx.family_name(FamilyName::DevilsStairs);
    let sizes = ctx.sizes(name, "128")?;
    let backends = ctx.factorizations(&[FirstFactorization::Qrcp, FirstFactorization::RurvRos])?;
    let mut t = Table::new(&[
        "row", "family", "m", "n", "rep", "backend", "index", "l_value", "sigma", "l_ratio", "sigma_ratio",
        "boundary",
    ]);
    for (s, &size) in sizes.iter().enumerate() {
        let family = ctx.family.family_at(name, size)?;
        let (m, n) = family_shape(&family);
        let mut ratios: Vec<Vec<Vec<f64>>> = vec![Vec::new(); backends.len()];
        let mut boundaries = Vec::new();
        for rep in 0..ctx.reps {
            let idx = (s * ctx.reps + rep) as u64;
            for (b, rec) in qlp_instance(&family, &backends, ctx.seed, idx, ctx.mixes)?.into_iter().enumerate() {
                boundaries = rec.boundaries();
                let p = rec.l_values.len();
                let mut per_index = Vec::with_capacity(p);
                for i in 0..p {
                    let (lr, sr) = if i + 1 < p {
                        (Some(rec.l_ratio(i)), Some(rec.sigma_ratio(i)))
                    } else {
                        (None, None)
                    };
                    per_index.push(lr.unwrap_or(f64::NAN));
                    t.push(vec![
                        "instance".into(),
                        family.name().into(),
                        m.to_string(),
                        n.to_string(),
                        rep.to_string(),
                        rec.backend.name().into(),
                        (i + 1).to_string(),
                        num(rec.l_values[i]),
                        num(rec.sigma[i]),
                        opt_num(lr),
                        opt_num(sr),
                        u8::from(boundaries.contains(&i)).to_string(),
                    ]);
                }
                ratios[b].push(per_index);
            }
        }
        for (b, backend) in backends.iter().enumerate() {
            for &i in &boundaries {
                let mut vals: Vec<f64> = ratios[b].iter().map(|r| r[i]).collect();
                vals.sort_by(f64::total_cmp);
                let mid = vals.len() / 2;
                let median = if vals.len() % 2 == 1 { vals[mid] } else { 0.5 * (vals[mid - 1] + vals[mid]) };
                let mut row = vec!["median".into(), family.name().into(), m.to_string(), n.to_string()];
                row.extend(["all".into(), backend.name().into(), (i + 1).to_string()]);
                row.extend(["NA".into(), "NA".into(), num(median), "NA".into(), "1".into()]);
                t.push(row);
            }
        }
    }
    Ok(t)
}

fn ls_table(ctx: &ExpContext<'_>) -> Result<Table> {
    let name = ctx.family_name(FamilyName::Correlated);
    let sizes = ctx.sizes(name, "100:400:100")?;
    let opts = RosOptions {
        num_mixes: ctx.mixes,
        presort: ctx.presort,
    };
    let mut t = Table::new(&[
        "row", "family", "m", "n", "rep", "method", "residual", "norm", "elapsed", "mix", "factor", "solve",
        "status",
    ]);
    for (s, rep, idx) in ctx.instances(&sizes) {
        let family = ctx.family.family_at(name, sizes[s])?;
        let (m, n) = family_shape(&family);
        let methods = ctx.methods(m, n)?;
        for rec in ls_instance(&family, &methods, opts, ctx.seed, idx)? {
            let mut row = vec![
                "instance".into(),
                family.name().into(),
                m.to_string(),
                n.to_string(),
                rep.to_string(),
                rec.method.name().into(),
            ];
            row.extend(ls_cells(&rec, ctx.timings));
            t.push(row);
        }
    }
    Ok(t)
}
