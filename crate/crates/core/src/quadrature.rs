//! Volume and edge quadrature on the reference interval `[0, 1]` and the
//! reference triangle `{x, y >= 0, x + y <= 1}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadDomain {
    Interval,
    Triangle,
    /// A straight face parametrized over `[0, 1]`; identical to `Interval`.
    Edge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub domain: QuadDomain,
    /// Requested exactness degree.
    pub degree: usize,
    /// Degree the underlying rule integrates exactly (>= `degree`).
    pub exactness: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 2], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(*p)).sum()
    }
}

pub fn quad_rule(domain: QuadDomain, degree: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_DEGREE).contains(&degree) {
        return Err(Error::UnsupportedDegree(degree));
    }
    match domain {
        QuadDomain::Interval | QuadDomain::Edge => {
            let n = degree / 2 + 1;
            let (x, w) = gauss_legendre_unit(n);
            Ok(QuadratureRule {
                domain,
                degree,
                exactness: 2 * n - 1,
                points: x.into_iter().map(|x| [x, 0.0]).collect(),
                weights: w,
            })
        }
        QuadDomain::Triangle => Ok(triangle_rule(degree)),
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

// Symmetric orbits in barycentric coordinates; weights are normalized to a
// unit-measure triangle and rescaled to the reference area 1/2 on expansion.
enum Orbit {
    Centroid(f64),
    S21 { a: f64, w: f64 },
    S111 { a: f64, b: f64, w: f64 },
}

#[allow(clippy::excessive_precision)]
fn triangle_orbits(degree: usize) -> (usize, Vec<Orbit>) {
    use Orbit::*;
    match degree {
        1 => (1, vec![Centroid(1.0)]),
        2 => (
            2,
            vec![S21 {
                a: 1.0 / 6.0,
                w: 1.0 / 3.0,
            }],
        ),
        3 | 4 => (
            4,
            vec![
                S21 {
                    a: 0.44594849091596488632,
                    w: 0.22338158967801146570,
                },
                S21 {
                    a: 0.091576213509770743460,
                    w: 0.10995174365532186764,
                },
            ],
        ),
        5 => (
            5,
            vec![
                Centroid(0.225),
                S21 {
                    a: 0.47014206410511508977,
                    w: 0.13239415278850618074,
                },
                S21 {
                    a: 0.10128650732345633880,
                    w: 0.12593918054482715260,
                },
            ],
        ),
        6 => (
            6,
            vec![
                S21 {
                    a: 0.24928674517091042129,
                    w: 0.11678627572637936603,
                },
                S21 {
                    a: 0.063089014491502228340,
                    w: 0.050844906370206816921,
                },
                S111 {
                    a: 0.053145049844816947353,
                    b: 0.31035245103378440542,
                    w: 0.082851075618373575194,
                },
            ],
        ),
        _ => (
            8,
            vec![
                Centroid(0.14431560767778716825),
                S21 {
                    a: 0.45929258829272315603,
                    w: 0.095091634267284624794,
                },
                S21 {
                    a: 0.17056930775176020662,
                    w: 0.10321737053471825028,
                },
                S21 {
                    a: 0.050547228317030975458,
                    w: 0.032458497623198080311,
                },
                S111 {
                    a: 0.0083947774099576053372,
                    b: 0.26311282963463811342,
                    w: 0.027230314174434994265,
                },
            ],
        ),
    }
}

fn triangle_rule(degree: usize) -> QuadratureRule {
    let (exactness, orbits) = triangle_orbits(degree);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    // barycentric (l0, l1, l2) -> reference (x, y) = (l1, l2)
    let mut push = |l1: f64, l2: f64, w: f64| {
        points.push([l1, l2]);
        weights.push(0.5 * w);
    };
    for orbit in orbits {
        match orbit {
            Orbit::Centroid(w) => push(1.0 / 3.0, 1.0 / 3.0, w),
            Orbit::S21 { a, w } => {
                let b = 1.0 - 2.0 * a;
                push(a, a, w);
                push(a, b, w);
                push(b, a, w);
            }
            Orbit::S111 { a, b, w } => {
                let c = 1.0 - a - b;
                for (x, y) in [(a, b), (b, a), (a, c), (c, a), (b, c), (c, b)] {
                    push(x, y, w);
                }
            }
        }
    }
    QuadratureRule {
        domain: QuadDomain::Triangle,
        degree,
        exactness,
        points,
        weights,
    }
}
