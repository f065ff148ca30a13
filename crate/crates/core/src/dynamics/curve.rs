//! Galactic rotation curves v(r) and the potential they imply.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Serialized form of a rotation curve (`rotation_curve.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    Flat {
        speed_kms: f64,
        domain: [f64; 2],
    },
    /// Natural cubic spline through `(r_kpc, v_kms)` knots.
    Table {
        knots: Vec<[f64; 2]>,
        domain: [f64; 2],
    },
    /// `v(r) = Σ c_k r^k`, r in kpc, v in km/s.
    Polynomial {
        coefficients: Vec<f64>,
        domain: [f64; 2],
    },
}

impl CurveSpec {
    pub fn domain(&self) -> [f64; 2] {
        match self {
            CurveSpec::Flat { domain, .. }
            | CurveSpec::Table { domain, .. }
            | CurveSpec::Polynomial { domain, .. } => *domain,
        }
    }
}

#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let c = h1 / 6.0;
                let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        CubicSpline { x, y, m }
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&k| k <= r) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - r) / h;
        let b = 1.0 - a;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Flat(f64),
    Spline(CubicSpline),
    Poly(Vec<f64>),
}

/// Circular-orbit speed as a function of galactocentric radius.
///
/// The same curve drives star motion and the ship force field, so every
/// catalog orbit is an exact coast arc. Evaluation outside `domain` is an
/// error.
#[derive(Debug, Clone)]
pub struct RotationCurve {
    spec: CurveSpec,
    shape: Shape,
    domain: [f64; 2],
    // (r, Φ(r)) with Φ(domain[0]) = 0, nodes at most 1 kpc apart
    potential_nodes: Vec<(f64, f64)>,
}

// 8-point Gauss–Legendre rule on [-1, 1].
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

impl RotationCurve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        let domain = spec.domain();
        if !(domain[0].is_finite() && domain[1].is_finite() && domain[0] > 0.0 && domain[0] < domain[1]) {
            return Err(Error::InvalidCurve(format!("bad domain {domain:?}")));
        }
        let shape = match &spec {
            CurveSpec::Flat { speed_kms, .. } => {
                if !(speed_kms.is_finite() && *speed_kms > 0.0) {
                    return Err(Error::InvalidCurve(format!("flat speed {speed_kms} must be positive")));
                }
                Shape::Flat(*speed_kms)
            }
            CurveSpec::Table { knots, .. } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidCurve("table needs at least two knots".into()));
                }
                if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::InvalidCurve("knot radii must be strictly increasing".into()));
                }
                if knots[0][0] > domain[0] || knots[knots.len() - 1][0] < domain[1] {
                    return Err(Error::InvalidCurve("knots must span the domain".into()));
                }
                let (x, y) = knots.iter().map(|k| (k[0], k[1])).unzip();
                Shape::Spline(CubicSpline::natural(x, y))
            }
            CurveSpec::Polynomial { coefficients, .. } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidCurve("polynomial needs coefficients".into()));
                }
                Shape::Poly(coefficients.clone())
            }
        };
        let mut curve = RotationCurve {
            spec,
            shape,
            domain,
            potential_nodes: Vec::new(),
        };
        // v > 0 and finite on a dense sample of the domain.
        let samples = 2000;
        for k in 0..=samples {
            let r = domain[0] + (domain[1] - domain[0]) * k as f64 / samples as f64;
            let v = curve.speed_unchecked(r);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidCurve(format!("v({r}) = {v} is not positive")));
            }
        }
        curve.build_potential();
        Ok(curve)
    }

    /// Flat curve on the default [2, 32] kpc domain.
    pub fn flat(speed_kms: f64) -> Result<Self> {
        Self::new(CurveSpec::Flat {
            speed_kms,
            domain: [2.0, 32.0],
        })
    }

    /// The shipped default: a table curve with a local minimum near 8 kpc and
    /// its global maximum between 18 and 20 kpc.
    pub fn default_curve() -> Self {
        Self::new(default_spec()).expect("default rotation curve is valid")
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn domain(&self) -> [f64; 2] {
        self.domain
    }

    #[inline]
    pub fn contains(&self, r: f64) -> bool {
        r >= self.domain[0] && r <= self.domain[1]
    }

    /// Circular speed in km/s.
    pub fn circular_speed(&self, r: f64) -> Result<f64> {
        if !self.contains(r) {
            return Err(Error::OutsideCurveDomain {
                r_kpc: r,
                min: self.domain[0],
                max: self.domain[1],
            });
        }
        Ok(self.speed_unchecked(r))
    }

    #[inline]
    pub(crate) fn speed_unchecked(&self, r: f64) -> f64 {
        match &self.shape {
            Shape::Flat(v) => *v,
            Shape::Spline(s) => s.eval(r),
            Shape::Poly(c) => c.iter().rev().fold(0.0, |acc, &k| acc * r + k),
        }
    }

    fn integrand(&self, r: f64) -> f64 {
        let v = self.speed_unchecked(r);
        v * v / r
    }

    fn gauss_legendre(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            sum += w * (self.integrand(mid + half * x) + self.integrand(mid - half * x));
        }
        sum * half
    }

    fn build_potential(&mut self) {
        let mut breaks = vec![self.domain[0], self.domain[1]];
        if let Shape::Spline(s) = &self.shape {
            breaks.extend(s.x.iter().copied().filter(|&x| self.contains(x)));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut nodes = vec![breaks[0]];
        for w in breaks.windows(2) {
            let pieces = ((w[1] - w[0]) / 1.0).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                nodes.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
            }
        }
        let mut phi = 0.0;
        let mut out = vec![(nodes[0], 0.0)];
        for w in nodes.windows(2) {
            phi += self.gauss_legendre(w[0], w[1]);
            out.push((w[1], phi));
        }
        self.potential_nodes = out;
    }

    /// Gravitational potential Φ(r) in (km/s)², with Φ' = v²/r and Φ = 0 at
    /// the inner domain edge.
    pub fn potential(&self, r: f64) -> Result<f64> {
        if !self.contains(r) {
            return Err(Error::OutsideCurveDomain {
                r_kpc: r,
                min: self.domain[0],
                max: self.domain[1],
            });
        }
        let k = self
            .potential_nodes
            .partition_point(|&(x, _)| x <= r)
            .saturating_sub(1);
        let (x0, phi0) = self.potential_nodes[k];
        Ok(phi0 + self.gauss_legendre(x0, r))
    }

    /// Content hash of the curve definition; part of the ephemeris cache key.
    pub fn config_hash(&self) -> [u8; 32] {
        let json = serde_json::to_vec(&self.spec).expect("curve spec serializes");
        Sha256::digest(&json).into()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: CurveSpec = serde_json::from_str(s)?;
        Self::new(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }
}

impl Default for RotationCurve {
    fn default() -> Self {
        Self::default_curve()
    }
}

impl PartialEq for RotationCurve {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

pub fn default_spec() -> CurveSpec {
    CurveSpec::Table {
        knots: vec![
            [2.0, 180.0],
            [4.0, 230.0],
            [6.0, 222.0],
            [8.0, 210.0],
            [10.0, 218.0],
            [12.0, 232.0],
            [14.0, 240.0],
            [16.0, 246.0],
            [18.0, 252.0],
            [20.0, 250.0],
            [22.0, 240.0],
            [24.0, 232.0],
            [26.0, 226.0],
            [28.0, 222.0],
            [30.0, 220.0],
            [32.0, 218.0],
        ],
        domain: [2.0, 32.0],
    }
}
