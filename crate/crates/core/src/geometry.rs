//! Exact integration of piecewise-linear functions over axis-aligned rectangles.
//!
//! Used for the checkerboard cell integrals of the singular invariant copulas
//! (M, W, V and their mixtures), whose CDFs are piecewise linear.

use serde::{Deserialize, Serialize};

/// Closed axis-aligned rectangle `[u0,u1] × [v0,v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Rect {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        debug_assert!(u0 <= u1 && v0 <= v1, "degenerate rectangle");
        Rect { u0, u1, v0, v1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0)
    }

    /// Strict interior test.
    pub fn contains_open(&self, u: f64, v: f64) -> bool {
        u > self.u0 && u < self.u1 && v > self.v0 && v < self.v1
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u0 && u <= self.u1 && v >= self.v0 && v <= self.v1
    }

    fn polygon(&self) -> Vec<(f64, f64)> {
        vec![
            (self.u0, self.v0),
            (self.u1, self.v0),
            (self.u1, self.v1),
            (self.u0, self.v1),
        ]
    }
}

/// `p·u + q·v + r`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Affine {
    pub const fn new(p: f64, q: f64, r: f64) -> Self {
        Affine { p, q, r }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.p * u + self.q * v + self.r
    }
}

/// Half-plane `a·u + b·v + c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        HalfPlane { a, b, c }
    }

    fn side(&self, pt: (f64, f64)) -> f64 {
        self.a * pt.0 + self.b * pt.1 + self.c
    }
}

#[derive(Debug, Clone)]
pub struct LinearPiece {
    pub region: Vec<HalfPlane>,
    pub value: Affine,
}

/// A function on the unit square that is affine on each convex piece.
/// Pieces may share boundaries but must not overlap in area.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    pub pieces: Vec<LinearPiece>,
}

impl PiecewiseLinear {
    pub fn integrate_over(&self, rect: &Rect) -> f64 {
        let base = rect.polygon();
        let mut total = 0.0;
        for piece in &self.pieces {
            let mut poly = base.clone();
            for hp in &piece.region {
                poly = clip(&poly, hp);
                if poly.len() < 3 {
                    break;
                }
            }
            if poly.len() < 3 {
                continue;
            }
            let (area, cu, cv) = area_centroid(&poly);
            total += area * piece.value.eval(cu, cv);
        }
        total
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        for piece in &self.pieces {
            if piece.region.iter().all(|hp| hp.side((u, v)) >= 0.0) {
                return piece.value.eval(u, v);
            }
        }
        f64::NAN
    }
}

/// Area of the intersection of a convex polygon with a rectangle.
pub fn clipped_area(poly: &[(f64, f64)], rect: &Rect) -> f64 {
    let planes = [
        HalfPlane::new(1.0, 0.0, -rect.u0),
        HalfPlane::new(-1.0, 0.0, rect.u1),
        HalfPlane::new(0.0, 1.0, -rect.v0),
        HalfPlane::new(0.0, -1.0, rect.v1),
    ];
    let mut p = poly.to_vec();
    for hp in &planes {
        p = clip(&p, hp);
        if p.len() < 3 {
            return 0.0;
        }
    }
    area_centroid(&p).0
}

/// Fraction of the segment `a → b` lying inside a closed rectangle.
pub fn clipped_fraction(a: (f64, f64), b: (f64, f64), rect: &Rect) -> f64 {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let d = (b.0 - a.0, b.1 - a.1);
    for (p, q) in [
        (-d.0, a.0 - rect.u0),
        (d.0, rect.u1 - a.0),
        (-d.1, a.1 - rect.v0),
        (d.1, rect.v1 - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return 0.0;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t1 - t0).max(0.0)
}

/// Sutherland–Hodgman clipping of a convex polygon against one half-plane.
fn clip(poly: &[(f64, f64)], hp: &HalfPlane) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let sc = hp.side(cur);
        let sn = hp.side(nxt);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push((cur.0 + t * (nxt.0 - cur.0), cur.1 + t * (nxt.1 - cur.1)));
        }
    }
    out
}

fn area_centroid(poly: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = poly.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        a2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    if a2.abs() < 1e-300 {
        return (0.0, 0.0, 0.0);
    }
    let area = 0.5 * a2;
    (area.abs(), cx / (3.0 * a2), cy / (3.0 * a2))
}

/// Piecewise-linear form of the upper Fréchet bound `min(u, v)`.
pub fn upper_bound_pieces() -> PiecewiseLinear {
    PiecewiseLinear {
        pieces: vec![
            LinearPiece {
                region: vec![HalfPlane::new(-1.0, 1.0, 0.0)],
                value: Affine::new(1.0, 0.0, 0.0),
            },
            LinearPiece {
                region: vec![HalfPlane::new(1.0, -1.0, 0.0)],
                value: Affine::new(0.0, 1.0, 0.0),
            },
        ],
    }
}

/// Piecewise-linear form of the lower Fréchet bound `max(u + v - 1, 0)`.
pub fn lower_bound_pieces() -> PiecewiseLinear {
    PiecewiseLinear {
        pieces: vec![
            LinearPiece {
                region: vec![HalfPlane::new(1.0, 1.0, -1.0)],
                value: Affine::new(1.0, 1.0, -1.0),
            },
            LinearPiece {
                region: vec![HalfPlane::new(-1.0, -1.0, 1.0)],
                value: Affine::new(0.0, 0.0, 0.0),
            },
        ],
    }
}

/// Piecewise-linear form of the invariant copula `V`.
pub fn v_copula_pieces() -> PiecewiseLinear {
    PiecewiseLinear {
        pieces: vec![
            // u - v > 1/2 : M = v
            LinearPiece {
                region: vec![HalfPlane::new(1.0, -1.0, -0.5)],
                value: Affine::new(0.0, 1.0, 0.0),
            },
            // v - u > 1/2 : M = u
            LinearPiece {
                region: vec![HalfPlane::new(-1.0, 1.0, -0.5)],
                value: Affine::new(1.0, 0.0, 0.0),
            },
            // u + v > 3/2 : W = u + v - 1
            LinearPiece {
                region: vec![HalfPlane::new(1.0, 1.0, -1.5)],
                value: Affine::new(1.0, 1.0, -1.0),
            },
            // u + v < 1/2 : W = 0
            LinearPiece {
                region: vec![HalfPlane::new(-1.0, -1.0, 0.5)],
                value: Affine::new(0.0, 0.0, 0.0),
            },
            LinearPiece {
                region: vec![
                    HalfPlane::new(-1.0, 1.0, 0.5),
                    HalfPlane::new(1.0, -1.0, 0.5),
                    HalfPlane::new(-1.0, -1.0, 1.5),
                    HalfPlane::new(1.0, 1.0, -0.5),
                ],
                value: Affine::new(0.5, 0.5, -0.25),
            },
        ],
    }
}

/// Exact integral of `u·v` over a rectangle.
pub fn product_integral(rect: &Rect) -> f64 {
    0.25 * (rect.u1 * rect.u1 - rect.u0 * rect.u0) * (rect.v1 * rect.v1 - rect.v0 * rect.v0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn brute(f: impl Fn(f64, f64) -> f64, r: &Rect) -> f64 {
        // composite midpoint, fine enough for piecewise-linear integrands
        let k = 2000;
        let du = (r.u1 - r.u0) / k as f64;
        let dv = (r.v1 - r.v0) / k as f64;
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += f(r.u0 + (i as f64 + 0.5) * du, r.v0 + (j as f64 + 0.5) * dv);
            }
        }
        s * du * dv
    }

    #[test]
    fn piecewise_forms_match_closed_forms() {
        let m = upper_bound_pieces();
        let w = lower_bound_pieces();
        let v = v_copula_pieces();
        for &(u, vv) in &[(0.1, 0.7), (0.8, 0.2), (0.45, 0.55), (0.9, 0.95), (0.05, 0.3)] {
            assert_eq!(m.eval(u, vv), f64::min(u, vv));
            assert!((w.eval(u, vv) - (u + vv - 1.0).max(0.0)).abs() < 1e-15);
        }
        assert!((v.eval(0.75, 0.75) - 0.5).abs() < 1e-15);
        assert!((v.eval(0.1, 0.9) - 0.1).abs() < 1e-15);
        assert!((v.eval(0.1, 0.2) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn rectangle_integrals_match_brute_force() {
        let rects = [
            Rect::new(0.0, 1.0, 0.0, 1.0),
            Rect::new(0.1, 0.35, 0.2, 0.9),
            Rect::new(0.4, 0.6, 0.4, 0.6),
            Rect::new(0.7, 0.95, 0.05, 0.3),
        ];
        let v = v_copula_pieces();
        for r in &rects {
            let exact = v.integrate_over(r);
            let approx = brute(|a, b| v.eval(a, b), r);
            assert!((exact - approx).abs() < 1e-6, "{r:?}: {exact} vs {approx}");
        }
        // ∫∫ min(u,v) = 1/3 over the unit square
        assert!((upper_bound_pieces().integrate_over(&Rect::unit()) - 1.0 / 3.0).abs() < 1e-15);
        // ∫∫ uv over a cell, cross-checked by tensor Gauss–Legendre
        let r = Rect::new(0.2, 0.3, 0.6, 0.65);
        let gl = GaussLegendre::new(4);
        let q: f64 = gl
            .on_interval(r.u0, r.u1)
            .map(|(x, wx)| wx * gl.integrate(r.v0, r.v1, |y| x * y))
            .sum();
        assert!((product_integral(&r) - q).abs() < 1e-16);
    }
}
