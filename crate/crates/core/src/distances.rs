//! Distances between tabulated CDFs and densities.
//!
//! A [`GridFunction`] is a piecewise-linear tabulation. CDFs with jumps are
//! written with the jump abscissa repeated: the first copy carries the left
//! limit, the second the value at the point.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Floor applied to the second density inside logarithms.
pub const KL_FLOOR: f64 = 1e-300;
/// Mass below which a density value is treated as zero for support checks.
pub const SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Cdf,
    Pdf,
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cdf => "cdf",
            Self::Pdf => "pdf",
        })
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cdf" => Ok(Self::Cdf),
            "pdf" => Ok(Self::Pdf),
            other => Err(invalid(format!("unknown function kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    kind: FunctionKind,
}

/// `count` equally spaced points on [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && hi > lo);
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + i as f64 * step }).collect()
}

/// 4097 points on [−8, 8], the default grid for standardized quantities.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(-8.0, 8.0, 4097)
}

impl GridFunction {
    pub fn new(kind: FunctionKind, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let gf = Self { grid, values, kind };
        gf.validate()?;
        Ok(gf)
    }

    pub fn cdf(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(FunctionKind::Cdf, grid, values)
    }

    pub fn pdf(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(FunctionKind::Pdf, grid, values)
    }

    /// Tabulates `f` on `grid`.
    pub fn tabulate(kind: FunctionKind, grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(kind, grid, values)
    }

    /// Step CDF of a discrete law from (atom, cumulative probability) pairs,
    /// with a paired point at every jump and flat ends at `lo` and `hi`.
    pub fn step_cdf(jumps: &[(f64, f64)], lo: f64, hi: f64) -> Result<Self> {
        let mut grid = vec![lo];
        let mut values = vec![0.0];
        let mut prev = 0.0;
        for &(x, c) in jumps {
            if !(x > lo && x < hi) {
                return Err(invalid(format!("jump at {x} outside ({lo}, {hi})")));
            }
            grid.extend([x, x]);
            values.extend([prev, c]);
            prev = c;
        }
        grid.push(hi);
        values.push(prev);
        Self::cdf(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    fn validate(&self) -> Result<()> {
        let (g, v) = (&self.grid, &self.values);
        if g.len() < 2 || g.len() != v.len() {
            return Err(invalid("a tabulation needs at least two points and one value per point"));
        }
        if g.iter().chain(v).any(|x| !x.is_finite()) {
            return Err(invalid("tabulation contains non-finite entries"));
        }
        for (i, w) in g.windows(2).enumerate() {
            let repeated = w[1] == w[0];
            let allowed = self.kind == FunctionKind::Cdf
                && repeated
                && i > 0
                && g[i - 1] < w[0]
                && i + 2 < g.len();
            if w[1] < w[0] || (repeated && !allowed) {
                return Err(invalid(format!(
                    "grid must be increasing (jumps may repeat an interior point once), at index {}",
                    i + 1
                )));
            }
        }
        match self.kind {
            FunctionKind::Cdf => {
                if v.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                    return Err(invalid("CDF values must lie in [0, 1]"));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("CDF values must be non-decreasing"));
                }
            }
            FunctionKind::Pdf => {
                if v.iter().any(|&x| x < 0.0) {
                    return Err(invalid("density values must be non-negative"));
                }
                let mass = trapezoid(g, v);
                if !(0.98..=1.02).contains(&mass) {
                    return Err(invalid(format!("density integrates to {mass}, outside [0.98, 1.02]")));
                }
            }
        }
        Ok(())
    }

    /// Value just left of x.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.eval(x, true)
    }

    /// Value at x (right limit at a jump).
    pub fn eval_right(&self, x: f64) -> f64 {
        self.eval(x, false)
    }

    fn eval(&self, x: f64, left: bool) -> f64 {
        let (g, v) = (&self.grid, &self.values);
        let outside = match self.kind {
            FunctionKind::Cdf => (v[0], v[v.len() - 1]),
            FunctionKind::Pdf => (0.0, 0.0),
        };
        if x < g[0] {
            return outside.0;
        }
        if x > g[g.len() - 1] {
            return outside.1;
        }
        // first index with g[i] >= x (left) or g[i] > x (right)
        let i = if left {
            g.partition_point(|&t| t < x)
        } else {
            g.partition_point(|&t| t <= x)
        };
        if left {
            if g[i] == x {
                return v[i];
            }
        } else if i > 0 && g[i - 1] == x {
            return v[i - 1];
        }
        if i == 0 {
            return v[0];
        }
        if i == g.len() {
            return v[g.len() - 1];
        }
        let (x0, x1) = (g[i - 1], g[i]);
        let t = (x - x0) / (x1 - x0);
        v[i - 1] + t * (v[i] - v[i - 1])
    }

    /// Writes `# kind=<kind>` followed by `abscissa,value` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# kind={}", self.kind)?;
        writeln!(out, "x,value")?;
        for (x, y) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{x},{y}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`GridFunction::write_csv`]. The header
    /// row is optional; other `#` lines are ignored.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut kind = None;
        let (mut grid, mut values) = (Vec::new(), Vec::new());
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx as u64 + 1;
            let text = line.trim();
            if let Some(comment) = text.strip_prefix('#') {
                if let Some(k) = comment.trim().strip_prefix("kind=") {
                    kind = Some(k.parse::<FunctionKind>()?);
                }
                continue;
            }
            if text.is_empty() {
                continue;
            }
            let mut cols = text.split(',');
            let (a, b) = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => (a.trim(), b.trim()),
                _ => {
                    return Err(Error::Parse { line: lineno, message: "expected two columns".into() })
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    grid.push(x);
                    values.push(y);
                }
                _ if grid.is_empty() && a.parse::<f64>().is_err() => continue,
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("cannot parse `{text}` as two numbers"),
                    })
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing `# kind=cdf|pdf` line".into(),
        })?;
        Self::new(kind, grid, values)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

fn require_kind(f: &GridFunction, g: &GridFunction, kind: FunctionKind) -> Result<()> {
    if f.kind != kind || g.kind != kind {
        return Err(invalid(format!(
            "expected two {kind} tabulations, got {} and {}",
            f.kind, g.kind
        )));
    }
    Ok(())
}

fn merged_abscissae(f: &GridFunction, g: &GridFunction) -> Vec<f64> {
    let mut xs: Vec<f64> = f.grid.iter().chain(&g.grid).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// sup |F − G|, taken over both one-sided limits at every abscissa of
/// either tabulation. Between abscissae both are linear, so this is exact.
pub fn ks_distance(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    require_kind(f, g, FunctionKind::Cdf)?;
    Ok(merged_abscissae(f, g)
        .into_iter()
        .map(|x| {
            let l = (f.eval_left(x) - g.eval_left(x)).abs();
            let r = (f.eval_right(x) - g.eval_right(x)).abs();
            l.max(r)
        })
        .fold(0.0, f64::max))
}

/// ∫|F − G|, exact for the piecewise-linear interpolants.
pub fn wkr_distance(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    require_kind(f, g, FunctionKind::Cdf)?;
    let xs = merged_abscissae(f, g);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    for (end, d) in [(lo, f.eval_left(lo) - g.eval_left(lo)), (hi, f.eval_right(hi) - g.eval_right(hi))] {
        if d.abs() > 1e-6 {
            return Err(Error::Truncation(format!(
                "|F − G| = {} at grid end {end}; widen the grid",
                d.abs()
            )));
        }
    }
    let mut total = 0.0;
    for w in xs.windows(2) {
        let d0 = f.eval_right(w[0]) - g.eval_right(w[0]);
        let d1 = f.eval_left(w[1]) - g.eval_left(w[1]);
        total += abs_linear_integral(w[1] - w[0], d0, d1);
    }
    Ok(total)
}

/// ∫₀ʰ |linear from d0 to d1|.
fn abs_linear_integral(h: f64, d0: f64, d1: f64) -> f64 {
    if d0 * d1 >= 0.0 {
        0.5 * h * (d0.abs() + d1.abs())
    } else {
        0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
    }
}

/// Both densities on one grid: the shared grid when they agree, else the
/// union of both grids with linear interpolation.
fn common_pdf_values(f: &GridFunction, g: &GridFunction) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    require_kind(f, g, FunctionKind::Pdf)?;
    if f.grid == g.grid {
        return Ok((f.grid.clone(), f.values.clone(), g.values.clone()));
    }
    let xs = merged_abscissae(f, g);
    let fv = xs.iter().map(|&x| f.eval_right(x)).collect();
    let gv = xs.iter().map(|&x| g.eval_right(x)).collect();
    Ok((xs, fv, gv))
}

/// Bhattacharyya coefficient BC = ∫√(fg) and distance −ln BC, with both
/// tabulated densities scaled to unit mass on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bhattacharyya {
    pub coefficient: f64,
    pub distance: f64,
}

pub fn bhattacharyya(f: &GridFunction, g: &GridFunction) -> Result<Bhattacharyya> {
    let (xs, fv, gv) = common_pdf_values(f, g)?;
    let root: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| (a * b).sqrt()).collect();
    let mass = (trapezoid(&xs, &fv) * trapezoid(&xs, &gv)).sqrt();
    // √(a·a) = a in floating point, so identical inputs give exactly 1
    let coefficient = (trapezoid(&xs, &root) / mass).clamp(0.0, 1.0);
    Ok(Bhattacharyya { coefficient, distance: -coefficient.ln() })
}

/// H = √(1 − BC).
pub fn hellinger(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    Ok((1.0 - bhattacharyya(f, g)?.coefficient).sqrt())
}

/// KL(f‖g) = CrEn(f, g) − DE(f).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlDivergence {
    pub divergence: f64,
    /// −∫ f ln g
    pub cross_entropy: f64,
    /// −∫ f ln f
    pub differential_entropy: f64,
}

pub fn kl_divergence(f: &GridFunction, g: &GridFunction) -> Result<KlDivergence> {
    let (xs, fv, gv) = common_pdf_values(f, g)?;
    kl_on_grid(&xs, &fv, &gv)
}

fn kl_on_grid(xs: &[f64], fv: &[f64], gv: &[f64]) -> Result<KlDivergence> {
    let mut cross = Vec::with_capacity(xs.len());
    let mut own = Vec::with_capacity(xs.len());
    let mut ratio = Vec::with_capacity(xs.len());
    for ((&x, &a), &b) in xs.iter().zip(fv).zip(gv) {
        if a > SUPPORT_EPS && b < KL_FLOOR {
            return Err(Error::SupportMismatch(format!(
                "first density is {a} at {x} where the second vanishes"
            )));
        }
        if a > 0.0 {
            let lb = b.max(KL_FLOOR).ln();
            cross.push(-a * lb);
            own.push(-a * a.ln());
            ratio.push(a * (a.ln() - lb));
        } else {
            cross.push(0.0);
            own.push(0.0);
            ratio.push(0.0);
        }
    }
    Ok(KlDivergence {
        divergence: trapezoid(xs, &ratio),
        cross_entropy: trapezoid(xs, &cross),
        differential_entropy: trapezoid(xs, &own),
    })
}

/// √(½[KL(f‖m) + KL(g‖m)]) with m = ½(f + g).
pub fn js_metric(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let (xs, fv, gv) = common_pdf_values(f, g)?;
    let m: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| 0.5 * (a + b)).collect();
    let kf = kl_on_grid(&xs, &fv, &m)?.divergence;
    let kg = kl_on_grid(&xs, &gv, &m)?.divergence;
    Ok((0.5 * (kf + kg)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::{norm_cdf, norm_pdf, norm_quantile};

    fn gauss_cdf(shift: f64, scale: f64) -> GridFunction {
        GridFunction::tabulate(FunctionKind::Cdf, default_grid(), |z| norm_cdf((z - shift) / scale)).unwrap()
    }

    fn gauss_pdf_on(grid: Vec<f64>, shift: f64, scale: f64) -> GridFunction {
        GridFunction::tabulate(FunctionKind::Pdf, grid, |z| norm_pdf((z - shift) / scale) / scale).unwrap()
    }

    fn gauss_pdf(shift: f64, scale: f64) -> GridFunction {
        gauss_pdf_on(default_grid(), shift, scale)
    }

    #[test]
    fn validation() {
        assert!(GridFunction::cdf(vec![0.0], vec![0.5]).is_err());
        assert!(GridFunction::cdf(vec![0.0, 1.0], vec![0.6, 0.5]).is_err());
        assert!(GridFunction::cdf(vec![1.0, 0.0], vec![0.1, 0.5]).is_err());
        assert!(GridFunction::cdf(vec![0.0, 1.0, 1.0, 2.0], vec![0.0, 0.2, 0.7, 1.0]).is_ok());
        assert!(GridFunction::cdf(vec![0.0, 1.0, 1.0, 1.0, 2.0], vec![0.0, 0.2, 0.5, 0.7, 1.0]).is_err());
        assert!(GridFunction::pdf(vec![0.0, 1.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, 0.0]).is_err());
        assert!(GridFunction::pdf(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(GridFunction::pdf(vec![0.0, 1.0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn one_sided_evaluation() {
        let f = GridFunction::step_cdf(&[(0.0, 0.4), (1.0, 1.0)], -1.0, 2.0).unwrap();
        assert_eq!(f.eval_left(0.0), 0.0);
        assert_eq!(f.eval_right(0.0), 0.4);
        assert_eq!(f.eval_right(0.5), 0.4);
        assert_eq!(f.eval_left(1.0), 0.4);
        assert_eq!(f.eval_right(1.0), 1.0);
        assert_eq!(f.eval_right(5.0), 1.0);
        assert_eq!(f.eval_left(-5.0), 0.0);
    }

    #[test]
    fn ks_examples() {
        let f = gauss_cdf(0.0, 1.0);
        assert_eq!(ks_distance(&f, &f).unwrap(), 0.0);
        let g = gauss_cdf(0.1, 1.0);
        let d = ks_distance(&f, &g).unwrap();
        assert!((d - (2.0 * norm_cdf(0.05) - 1.0)).abs() < 2e-4);
        assert!((d - 0.039_88).abs() < 2e-4);
        assert_eq!(d, ks_distance(&g, &f).unwrap());

        let a = GridFunction::cdf(vec![0.0, 1.0], vec![0.5, 1.0]).unwrap();
        let b = GridFunction::cdf(vec![0.0, 1.0], vec![0.3, 1.0]).unwrap();
        assert!((ks_distance(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        let a = GridFunction::step_cdf(&[(0.0, 0.5), (1.0, 1.0)], -1.0, 2.0).unwrap();
        let b = GridFunction::step_cdf(&[(0.0, 0.3), (1.0, 1.0)], -1.0, 2.0).unwrap();
        assert!((ks_distance(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert!(ks_distance(&a, &gauss_pdf(0.0, 1.0)).is_err());
    }

    #[test]
    fn ks_sees_both_sides_of_a_jump() {
        // jump at 0 from 0 to 1 against a constant ½ across it
        let step = GridFunction::step_cdf(&[(0.0, 1.0)], -1.0, 1.0).unwrap();
        let flat = GridFunction::cdf(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(ks_distance(&step, &flat).unwrap(), 0.5);
    }

    #[test]
    fn wkr_examples() {
        let f = gauss_cdf(0.0, 1.0);
        assert_eq!(wkr_distance(&f, &f).unwrap(), 0.0);
        let g = gauss_cdf(0.25, 1.0);
        assert!((wkr_distance(&f, &g).unwrap() - 0.25).abs() < 1e-3);
        let short = GridFunction::tabulate(FunctionKind::Cdf, uniform_grid(-1.0, 1.0, 101), norm_cdf).unwrap();
        let short_g = GridFunction::tabulate(FunctionKind::Cdf, uniform_grid(-1.0, 1.0, 101), |z| norm_cdf(z - 0.5))
            .unwrap();
        assert!(matches!(wkr_distance(&short, &short_g), Err(Error::Truncation(_))));
    }

    #[test]
    fn wkr_equals_quantile_form() {
        let g = gauss_cdf(0.3, 1.4);
        let f = gauss_cdf(0.0, 1.0);
        let m = 200_000;
        let quantile_form: f64 = (0..m)
            .map(|i| {
                let p = (i as f64 + 0.5) / m as f64;
                let z = norm_quantile(p);
                (z - (0.3 + 1.4 * z)).abs()
            })
            .sum::<f64>()
            / m as f64;
        assert!((wkr_distance(&f, &g).unwrap() - quantile_form).abs() < 1e-3);
    }

    #[test]
    fn hellinger_bhattacharyya() {
        let f = gauss_pdf(0.0, 1.0);
        let same = bhattacharyya(&f, &f).unwrap();
        assert!((same.coefficient - 1.0).abs() < 1e-9 && same.distance.abs() < 1e-9);
        assert!(hellinger(&f, &f).unwrap() < 1e-4);
        let g = gauss_pdf(1.0, 1.0);
        let bc = bhattacharyya(&f, &g).unwrap();
        assert!((bc.coefficient - (-1.0f64 / 8.0).exp()).abs() < 1e-3);
        assert!((bc.coefficient - 0.882_50).abs() < 1e-3);
        let h = hellinger(&f, &g).unwrap();
        assert!((h * h + bc.coefficient - 1.0).abs() < 1e-12);
        assert_eq!(h, hellinger(&g, &f).unwrap());
    }

    #[test]
    fn kl_examples() {
        let f = gauss_pdf(0.0, 1.0);
        assert!(kl_divergence(&f, &f).unwrap().divergence.abs() < 1e-12);
        let g = gauss_pdf(1.0, 1.0);
        let kl = kl_divergence(&f, &g).unwrap();
        assert!((kl.divergence - 0.5).abs() < 2e-3);
        assert!((kl.cross_entropy - kl.differential_entropy - kl.divergence).abs() < 1e-9);
        let de = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((kl.differential_entropy - de).abs() < 1e-6);

        // unequal variances: KL(N(0,1)‖N(0,4)) = ln 2 + 1/8 − 1/2, reverse = −ln 2 + 2 − 1/2
        let wide = gauss_pdf(0.0, 2.0);
        let fw = kl_divergence(&f, &wide).unwrap().divergence;
        let wf = kl_divergence(&wide, &f).unwrap().divergence;
        assert!((fw - (2f64.ln() + 0.125 - 0.5)).abs() < 2e-3);
        assert!((wf - (-(2f64.ln()) + 2.0 - 0.5)).abs() < 2e-3);
        assert!((fw - wf).abs() > 0.1);
    }

    #[test]
    fn kl_support_mismatch() {
        let grid = uniform_grid(0.0, 4.0, 5);
        let f = GridFunction::pdf(grid.clone(), vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let g = GridFunction::pdf(grid, vec![0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(kl_divergence(&f, &g), Err(Error::SupportMismatch(_))));
    }

    #[test]
    fn js_examples() {
        let grid = uniform_grid(0.0, 4.0, 5);
        let f = GridFunction::pdf(grid.clone(), vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let g = GridFunction::pdf(grid, vec![0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((js_metric(&f, &g).unwrap() - 2f64.ln().sqrt()).abs() < 1e-6);
        let a = gauss_pdf(0.0, 1.0);
        let b = gauss_pdf(0.7, 1.3);
        assert_eq!(js_metric(&a, &b).unwrap(), js_metric(&b, &a).unwrap());
        assert_eq!(js_metric(&a, &a).unwrap(), 0.0);
        assert!(js_metric(&a, &b).unwrap() <= 2f64.ln().sqrt() + 1e-9);
    }

    #[test]
    fn grid_refinement_is_stable() {
        let coarse = uniform_grid(-8.0, 8.0, 4097);
        let fine = uniform_grid(-8.0, 8.0, 8193);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let pair = |grid: &Vec<f64>| (gauss_pdf_on(grid.clone(), 0.0, 1.0), gauss_pdf_on(grid.clone(), 0.8, 1.2));
        let (f0, g0) = pair(&coarse);
        let (f1, g1) = pair(&fine);
        assert!(rel(hellinger(&f0, &g0).unwrap(), hellinger(&f1, &g1).unwrap()) < 5e-3);
        assert!(rel(
            kl_divergence(&f0, &g0).unwrap().divergence,
            kl_divergence(&f1, &g1).unwrap().divergence
        ) < 5e-3);
        assert!(rel(js_metric(&f0, &g0).unwrap(), js_metric(&f1, &g1).unwrap()) < 5e-3);
        let cdf = |grid: &Vec<f64>, s: f64| GridFunction::tabulate(FunctionKind::Cdf, grid.clone(), |z| norm_cdf(z - s)).unwrap();
        let ks0 = ks_distance(&cdf(&coarse, 0.0), &cdf(&coarse, 0.3)).unwrap();
        let ks1 = ks_distance(&cdf(&fine, 0.0), &cdf(&fine, 0.3)).unwrap();
        assert!(rel(ks0, ks1) < 5e-3);
        let w0 = wkr_distance(&cdf(&coarse, 0.0), &cdf(&coarse, 0.3)).unwrap();
        let w1 = wkr_distance(&cdf(&fine, 0.0), &cdf(&fine, 0.3)).unwrap();
        assert!(rel(w0, w1) < 5e-3);
    }

    #[test]
    fn csv_round_trip() {
        let f = GridFunction::step_cdf(&[(0.0, 0.25), (1.5, 1.0)], -1.0, 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# kind=cdf\n"));
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(GridFunction::read_csv("0,0\n1,1\n".as_bytes()).is_err());
        let err = GridFunction::read_csv("# kind=cdf\nx,value\n0,0\n1,oops\n".as_bytes()).unwrap_err();
        assert_eq!(err, Error::Parse { line: 4, message: "cannot parse `1,oops` as two numbers".into() });
    }
}
