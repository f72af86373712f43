//! Test functions and sampling-point generators on `[-1, 1]^d`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

/// PRNG identity recorded alongside every random sample set.
pub const RNG_IDENTITY: &str = "rand_chacha::ChaCha8Rng::seed_from_u64 + Uniform::new_inclusive(-1,1)";

/// Chebyshev node family used by [`chebyshev_nodes`].
pub const CHEBYSHEV_FAMILY: &str = "chebyshev-gauss";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Runge,
    TruncatedSine,
    Step,
    GaussianPeak,
    ContinuousPeak,
    CornerPeak,
}

impl FunctionKind {
    pub fn is_univariate(self) -> bool {
        matches!(self, Self::Runge | Self::TruncatedSine | Self::Step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `(101/100) (1/(1 + 100 x^2) - 1/101)`
    Runge,
    /// `[sin(pi (x+1)/2) - sin(0.6 pi)] 1{|x| < 0.2}`
    TruncatedSine,
    /// `1{x > 0}`
    Step,
    GaussianPeak { sigma: Vec<f64>, omega: Vec<f64> },
    ContinuousPeak { sigma: Vec<f64>, omega: Vec<f64> },
    CornerPeak { sigma: Vec<f64> },
}

impl TestFunction {
    pub fn new(kind: FunctionKind, sigma: Option<Vec<f64>>, omega: Option<Vec<f64>>) -> Result<Self> {
        let need = |v: Option<Vec<f64>>, name: &str| {
            v.ok_or_else(|| Error::InvalidArgument(format!("{kind:?} requires {name}")))
        };
        let tf = match kind {
            FunctionKind::Runge | FunctionKind::TruncatedSine | FunctionKind::Step => {
                if sigma.is_some() || omega.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "{kind:?} takes no sigma/omega parameters"
                    )));
                }
                match kind {
                    FunctionKind::Runge => TestFunction::Runge,
                    FunctionKind::TruncatedSine => TestFunction::TruncatedSine,
                    _ => TestFunction::Step,
                }
            }
            FunctionKind::GaussianPeak | FunctionKind::ContinuousPeak => {
                let sigma = need(sigma, "sigma")?;
                let omega = need(omega, "omega")?;
                if sigma.len() != omega.len() || sigma.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "sigma ({}) and omega ({}) must have equal non-zero length",
                        sigma.len(),
                        omega.len()
                    )));
                }
                if kind == FunctionKind::GaussianPeak {
                    TestFunction::GaussianPeak { sigma, omega }
                } else {
                    TestFunction::ContinuousPeak { sigma, omega }
                }
            }
            FunctionKind::CornerPeak => {
                if omega.is_some() {
                    return Err(Error::InvalidArgument("corner_peak takes no omega".into()));
                }
                let sigma = need(sigma, "sigma")?;
                if sigma.is_empty() {
                    return Err(Error::InvalidArgument("sigma must be non-empty".into()));
                }
                TestFunction::CornerPeak { sigma }
            }
        };
        Ok(tf)
    }

    /// Peak function with the default parameters for dimension `d`.
    pub fn with_defaults(kind: FunctionKind, d: usize) -> Result<Self> {
        match kind {
            FunctionKind::GaussianPeak | FunctionKind::ContinuousPeak => {
                Self::new(kind, Some(vec![10.0; d]), Some(vec![0.5; d]))
            }
            FunctionKind::CornerPeak => Self::new(kind, Some(vec![20.0; d]), None),
            _ if d == 1 => Self::new(kind, None, None),
            _ => Err(Error::InvalidArgument(format!("{kind:?} is univariate, got d={d}"))),
        }
    }

    pub fn kind(&self) -> FunctionKind {
        match self {
            TestFunction::Runge => FunctionKind::Runge,
            TestFunction::TruncatedSine => FunctionKind::TruncatedSine,
            TestFunction::Step => FunctionKind::Step,
            TestFunction::GaussianPeak { .. } => FunctionKind::GaussianPeak,
            TestFunction::ContinuousPeak { .. } => FunctionKind::ContinuousPeak,
            TestFunction::CornerPeak { .. } => FunctionKind::CornerPeak,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Runge | TestFunction::TruncatedSine | TestFunction::Step => 1,
            TestFunction::GaussianPeak { sigma, .. }
            | TestFunction::ContinuousPeak { sigma, .. }
            | TestFunction::CornerPeak { sigma } => sigma.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::dim("test function point", self.dim(), x.len()));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Runge => {
                let t = x[0];
                1.01 * (1.0 / (1.0 + 100.0 * t * t) - 1.0 / 101.0)
            }
            TestFunction::TruncatedSine => {
                let t = x[0];
                if t.abs() < 0.2 {
                    (PI * (t + 1.0) / 2.0).sin() - (0.6 * PI).sin()
                } else {
                    0.0
                }
            }
            TestFunction::Step => {
                if x[0] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::GaussianPeak { sigma, omega } => {
                let s: f64 = x
                    .iter()
                    .zip(sigma.iter().zip(omega))
                    .map(|(&xi, (&s, &w))| {
                        let t = (xi + 1.0) / 2.0 - w;
                        s * s * t * t
                    })
                    .sum();
                (-s).exp()
            }
            TestFunction::ContinuousPeak { sigma, omega } => {
                let s: f64 = x
                    .iter()
                    .zip(sigma.iter().zip(omega))
                    .map(|(&xi, (&s, &w))| s * ((xi + 1.0) / 2.0 - w).abs())
                    .sum();
                (-s).exp()
            }
            TestFunction::CornerPeak { sigma } => {
                let s: f64 = x
                    .iter()
                    .zip(sigma)
                    .map(|(&xi, &s)| s * (xi + 1.0) / 2.0)
                    .sum();
                (1.0 + s).powi(-(sigma.len() as i32 + 1))
            }
        }
    }

    /// Function values at every point of `samples`.
    pub fn sample(&self, samples: &SampleSet) -> Result<Vec<f64>> {
        if samples.dim() != self.dim() {
            return Err(Error::dim("sample set", self.dim(), samples.dim()));
        }
        Ok(samples.iter().map(|x| self.eval_unchecked(x)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Chebyshev,
    Equidistant,
    UniformRandom,
    TensorGrid,
    /// Points read from a file.
    External,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Generator::Chebyshev => "chebyshev",
            Generator::Equidistant => "equidistant",
            Generator::UniformRandom => "uniform_random",
            Generator::TensorGrid => "tensor_grid",
            Generator::External => "external",
        };
        f.write_str(s)
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chebyshev" => Ok(Generator::Chebyshev),
            "equidistant" => Ok(Generator::Equidistant),
            "uniform_random" => Ok(Generator::UniformRandom),
            "tensor_grid" => Ok(Generator::TensorGrid),
            "external" => Ok(Generator::External),
            other => Err(Error::InvalidArgument(format!("unknown sampler '{other}'"))),
        }
    }
}

/// Points in `[-1, 1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    points: Vec<f64>,
    generator: Generator,
    seed: Option<u64>,
}

/// Sidecar metadata written next to a sample-set CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub generator: Generator,
    pub count: usize,
    pub dim: usize,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub family: Option<String>,
}

impl SampleSet {
    pub fn from_points(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form points of dimension {dim}",
                points.len()
            )));
        }
        Ok(SampleSet {
            dim,
            points,
            generator: Generator::External,
            seed: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Row-major `len() x dim()` buffer.
    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn meta(&self) -> SampleMeta {
        SampleMeta {
            generator: self.generator,
            count: self.len(),
            dim: self.dim,
            seed: self.seed,
            rng: (self.generator == Generator::UniformRandom).then(|| RNG_IDENTITY.to_string()),
            family: (self.generator == Generator::Chebyshev).then(|| CHEBYSHEV_FAMILY.to_string()),
        }
    }

    /// CSV with header `x1,...,xd`, one point per row.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for p in self.iter() {
            io::push_row(&mut out, p);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, rows) = io::parse_csv(text)?;
        let dim = header.len();
        for (i, h) in header.iter().enumerate() {
            if *h != format!("x{}", i + 1) {
                return Err(Error::Parse(format!("unexpected point column '{h}'")));
            }
        }
        let points = rows.into_iter().flatten().collect();
        SampleSet::from_points(dim, points)
    }
}

/// Chebyshev-Gauss nodes `cos((2i-1) pi / (2K))`, in increasing order.
pub fn chebyshev_nodes(count: usize) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one Chebyshev node".into()));
    }
    let k = count as f64;
    // i = K..1 gives increasing nodes
    let points = (1..=count)
        .rev()
        .map(|i| ((2.0 * i as f64 - 1.0) * PI / (2.0 * k)).cos())
        .collect();
    Ok(SampleSet {
        dim: 1,
        points,
        generator: Generator::Chebyshev,
        seed: None,
    })
}

fn grid_1d(count: usize) -> Vec<f64> {
    let m = (count - 1) as f64;
    (0..count).map(|i| -1.0 + 2.0 * i as f64 / m).collect()
}

/// `y_i = -1 + 2(i-1)/(M-1)`, `i = 1..M`.
pub fn equidistant(count: usize) -> Result<SampleSet> {
    if count < 2 {
        return Err(Error::InvalidArgument("equidistant grid needs at least 2 points".into()));
    }
    Ok(SampleSet {
        dim: 1,
        points: grid_1d(count),
        generator: Generator::Equidistant,
        seed: None,
    })
}

/// I.i.d. uniform points on `[-1,1]^d` from a seeded ChaCha8 stream.
pub fn uniform_random(count: usize, d: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 || d == 0 {
        return Err(Error::InvalidArgument("uniform_random needs count >= 1 and d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
    let points = (0..count * d).map(|_| dist.sample(&mut rng)).collect();
    Ok(SampleSet {
        dim: d,
        points,
        generator: Generator::UniformRandom,
        seed: Some(seed),
    })
}

/// Cartesian product of `equidistant(per_dim)` in `d` dimensions; the last
/// coordinate varies fastest.
pub fn tensor_grid(per_dim: usize, d: usize, max_points: u128) -> Result<SampleSet> {
    if per_dim < 2 || d == 0 {
        return Err(Error::InvalidArgument("tensor_grid needs per_dim >= 2 and d >= 1".into()));
    }
    let total = (per_dim as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > max_points {
        return Err(Error::Capacity {
            what: "tensor grid",
            requested: total,
            limit: max_points,
        });
    }
    let axis = grid_1d(per_dim);
    let total = total as usize;
    let mut points = Vec::with_capacity(total * d);
    let mut digits = vec![0usize; d];
    for _ in 0..total {
        points.extend(digits.iter().map(|&i| axis[i]));
        for pos in (0..d).rev() {
            digits[pos] += 1;
            if digits[pos] < per_dim {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(SampleSet {
        dim: d,
        points,
        generator: Generator::TensorGrid,
        seed: None,
    })
}
