//! Flat-torus geometry, Poisson sampling and the thermodynamic-limit
//! parameterization `lambda = n * r^d`.
//!
//! Randomness: every cloud is generated from a single 64-bit seed fed to
//! ChaCha8. Campaigns derive per-trial seeds with [`trial_seed`], a
//! SplitMix64 mix of `(master, trial index)`, so a trial's cloud depends only
//! on the master seed and its index and never on worker scheduling.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// The unit flat torus `R^d / Z^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusSpec {
    d: usize,
}

impl TorusSpec {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::param(format!(
                "torus dimension must be in 2..={MAX_DIM}, got {d}"
            )));
        }
        Ok(Self { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Metric diameter `sqrt(d)/2`: every point is within this distance of any other.
    pub fn diameter(&self) -> f64 {
        (self.d as f64).sqrt() / 2.0
    }

    /// Volume of the unit `d`-ball.
    pub fn unit_ball_volume(&self) -> f64 {
        unit_ball_volume(self.d)
    }
}

pub fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` within a campaign seeded by `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x5EED)))
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Wrap a coordinate into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Signed wrapped difference `a - b` taken in `[-1/2, 1/2)`.
#[inline]
pub fn wrapped_delta(a: f64, b: f64) -> f64 {
    let mut t = a - b;
    t -= t.round();
    t
}

/// A Poisson sample on the flat torus.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    torus: TorusSpec,
    coords: Vec<f64>,
    rate: f64,
    seed: u64,
}

impl PointCloud {
    /// Build from explicit points. Coordinates are wrapped into `[0, 1)`.
    pub fn from_points(torus: TorusSpec, points: &[Vec<f64>], rate: f64, seed: u64) -> Result<Self> {
        let d = torus.dim();
        let mut coords = Vec::with_capacity(points.len() * d);
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::param(format!(
                    "point {i} has {} coordinates, expected {d}",
                    p.len()
                )));
            }
            for &x in p {
                if !x.is_finite() {
                    return Err(Error::param(format!("point {i} has a non-finite coordinate")));
                }
                coords.push(wrap_unit(x));
            }
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param(format!("rate must be finite and nonnegative, got {rate}")));
        }
        Ok(Self {
            torus,
            coords,
            rate,
            seed,
        })
    }

    pub fn empty(torus: TorusSpec, rate: f64, seed: u64) -> Self {
        Self {
            torus,
            coords: Vec::new(),
            rate,
            seed,
        }
    }

    pub fn torus(&self) -> TorusSpec {
        self.torus
    }

    pub fn dim(&self) -> usize {
        self.torus.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.torus.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.torus.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.torus.dim())
    }

    /// Stable 64-bit digest of the coordinates, used to tie diagrams to their cloud.
    pub fn fingerprint(&self) -> u64 {
        let mut h = mix64(self.torus.dim() as u64);
        for x in &self.coords {
            h = mix64(h ^ x.to_bits());
        }
        h
    }

    /// Translate every point by `shift` (mod 1).
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        let d = self.dim();
        if shift.len() != d {
            return Err(Error::param("shift dimension mismatch"));
        }
        let coords = self
            .coords
            .chunks_exact(d)
            .flat_map(|p| p.iter().zip(shift).map(|(x, t)| wrap_unit(x + t)))
            .collect();
        Ok(Self {
            coords,
            ..self.clone()
        })
    }

    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = (0..d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in self.points() {
            for (i, x) in p.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse the CSV form. The file carries no rate or seed; the caller
    /// supplies them (use the point count as the rate when unknown).
    pub fn from_csv(text: &str, rate: Option<f64>, seed: u64) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        let d = names.len();
        for (i, name) in names.iter().enumerate() {
            if *name != format!("x{i}") {
                return Err(Error::parse(1, format!("bad header column {name:?}")));
            }
        }
        let torus = TorusSpec::new(d).map_err(|e| Error::parse(1, e.to_string()))?;
        let mut points = Vec::new();
        for (lineno, line) in lines {
            let p: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(lineno + 1, e.to_string()))?;
            if p.len() != d {
                return Err(Error::parse(lineno + 1, format!("expected {d} columns")));
            }
            if p.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(Error::parse(lineno + 1, "coordinate outside [0,1)"));
            }
            points.push(p);
        }
        let rate = rate.unwrap_or(points.len() as f64);
        Self::from_points(torus, &points, rate, seed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CloudJson::from(self)).expect("cloud serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CloudJson = serde_json::from_str(text)?;
        let torus = TorusSpec::new(raw.d)?;
        for (i, p) in raw.points.iter().enumerate() {
            if p.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(Error::param(format!("point {i} has a coordinate outside [0,1)")));
            }
        }
        Self::from_points(torus, &raw.points, raw.rate, raw.seed)
    }
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    d: usize,
    rate: f64,
    seed: u64,
    points: Vec<Vec<f64>>,
}

impl From<&PointCloud> for CloudJson {
    fn from(c: &PointCloud) -> Self {
        CloudJson {
            d: c.dim(),
            rate: c.rate,
            seed: c.seed,
            points: c.points().map(<[f64]>::to_vec).collect(),
        }
    }
}

/// Draw a homogeneous Poisson process of the given rate on the torus.
pub fn sample_poisson(torus: TorusSpec, rate: f64, seed: u64) -> Result<PointCloud> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::param(format!("rate must be finite and nonnegative, got {rate}")));
    }
    let mut rng = rng_from_seed(seed);
    let count = if rate == 0.0 {
        0
    } else {
        Poisson::new(rate)
            .map_err(|e| Error::param(e.to_string()))?
            .sample(&mut rng) as usize
    };
    let d = torus.dim();
    let coords = (0..count * d).map(|_| rng.random::<f64>()).collect();
    Ok(PointCloud {
        torus,
        coords,
        rate,
        seed,
    })
}

/// Euclidean length of the coordinatewise wrapped difference.
pub fn toroidal_distance(x: &[f64], y: &[f64], torus: TorusSpec) -> Result<f64> {
    if x.len() != torus.dim() || y.len() != torus.dim() {
        return Err(Error::param(format!(
            "dimension mismatch: {} and {} against d={}",
            x.len(),
            y.len(),
            torus.dim()
        )));
    }
    Ok(toroidal_distance_sq(x, y).sqrt())
}

#[inline]
pub(crate) fn toroidal_distance_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = (a - b).abs();
            let t = t.min(1.0 - t);
            t * t
        })
        .sum()
}

/// `r = (lambda / n)^(1/d)`.
pub fn radius_from_lambda(n: f64, lambda: f64, d: usize) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::param(format!("rate n must be positive, got {n}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("lambda must be nonnegative, got {lambda}")));
    }
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    Ok((lambda / n).powf(1.0 / d as f64))
}

/// `lambda = n * r^d`.
pub fn lambda_from_radius(n: f64, r: f64, d: usize) -> f64 {
    n * r.powi(d as i32)
}

/// Intensity `lambda` at rate `n`, with the radius it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaParam {
    pub lambda: f64,
    pub n: f64,
    pub r: f64,
}

impl LambdaParam {
    pub fn new(lambda: f64, n: f64, d: usize) -> Result<Self> {
        let r = radius_from_lambda(n, lambda, d)?;
        Ok(Self { lambda, n, r })
    }
}
