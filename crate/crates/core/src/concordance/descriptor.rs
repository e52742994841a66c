use serde::{Deserialize, Serialize};

use crate::geometry::{clipped_area, clipped_fraction, Rect};
use crate::quadrature::GaussLegendre;

/// Default number of Gauss–Legendre points per direction.
pub const DEFAULT_ORDER: usize = 64;

/// Quadrature node of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

/// Piece of a measure on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasureComponent {
    /// Uniform density on a triangle carrying `mass`.
    Panel { vertices: [(f64, f64); 3], mass: f64 },
    /// Uniform mass on the segment `from → to`.
    Segment { from: (f64, f64), to: (f64, f64), mass: f64 },
    Atom { at: (f64, f64), mass: f64 },
}

impl MeasureComponent {
    pub fn mass(&self) -> f64 {
        match self {
            MeasureComponent::Panel { mass, .. }
            | MeasureComponent::Segment { mass, .. }
            | MeasureComponent::Atom { mass, .. } => *mass,
        }
    }

    fn scaled(&self, s: f64) -> Self {
        let mut c = self.clone();
        match &mut c {
            MeasureComponent::Panel { mass, .. }
            | MeasureComponent::Segment { mass, .. }
            | MeasureComponent::Atom { mass, .. } => *mass *= s,
        }
        c
    }

    fn rect_mass(&self, r: &Rect) -> f64 {
        match self {
            MeasureComponent::Panel { vertices, mass } => {
                let area = triangle_area(vertices);
                mass * clipped_area(vertices, r) / area
            }
            MeasureComponent::Segment { from, to, mass } => mass * clipped_fraction(*from, *to, r),
            MeasureComponent::Atom { at, mass } => {
                if r.contains(at.0, at.1) {
                    *mass
                } else {
                    0.0
                }
            }
        }
    }
}

fn triangle_area(p: &[(f64, f64); 3]) -> f64 {
    0.5 * ((p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1)).abs()
}

/// Quadrature representation of the measure induced by a copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    pub components: Vec<MeasureComponent>,
    pub order: usize,
    nodes: Vec<Node>,
}

impl MeasureDescriptor {
    pub fn new(components: Vec<MeasureComponent>, order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let mut nodes = Vec::new();
        for c in &components {
            push_nodes(c, &gl, &mut nodes);
        }
        MeasureDescriptor {
            components,
            order,
            nodes,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn total_mass(&self) -> f64 {
        self.components.iter().map(MeasureComponent::mass).sum()
    }

    pub fn node_mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.w).sum()
    }

    /// Mass of a closed rectangle, computed geometrically.
    pub fn rect_mass(&self, r: &Rect) -> f64 {
        self.components.iter().map(|c| c.rect_mass(r)).sum()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.w * f(n.u, n.v)).sum()
    }

    /// Integral over the open lower-left quadrant `(0,1/2)²`.
    pub fn integrate_lower_left(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.u < 0.5 && n.v < 0.5)
            .map(|n| n.w * f(n.u, n.v))
            .sum()
    }

    /// `Σ sᵢ μᵢ` for nonnegative scalars.
    pub fn combine(parts: &[(f64, &MeasureDescriptor)]) -> Self {
        let order = parts.iter().map(|(_, d)| d.order).max().unwrap_or(DEFAULT_ORDER);
        let components = parts
            .iter()
            .filter(|(s, _)| *s > 0.0)
            .flat_map(|(s, d)| d.components.iter().map(move |c| c.scaled(*s)))
            .collect();
        MeasureDescriptor::new(components, order)
    }
}

fn push_nodes(c: &MeasureComponent, gl: &GaussLegendre, out: &mut Vec<Node>) {
    match c {
        MeasureComponent::Panel { vertices, mass } => {
            // collapsed (Duffy) map of the unit square onto the triangle,
            // singular corner at vertices[0]
            let [p0, p1, p2] = *vertices;
            let dens = mass / triangle_area(vertices);
            let jac = 2.0 * triangle_area(vertices) * dens;
            for (s, ws) in gl.on_interval(0.0, 1.0) {
                for (t, wt) in gl.on_interval(0.0, 1.0) {
                    let u = p0.0 + s * (p1.0 - p0.0) + s * t * (p2.0 - p1.0);
                    let v = p0.1 + s * (p1.1 - p0.1) + s * t * (p2.1 - p1.1);
                    out.push(Node { u, v, w: ws * wt * s * jac });
                }
            }
        }
        MeasureComponent::Segment { from, to, mass } => {
            for (t, w) in gl.on_interval(0.0, 1.0) {
                out.push(Node {
                    u: from.0 + t * (to.0 - from.0),
                    v: from.1 + t * (to.1 - from.1),
                    w: w * mass,
                });
            }
        }
        MeasureComponent::Atom { at, mass } => out.push(Node {
            u: at.0,
            v: at.1,
            w: *mass,
        }),
    }
}

fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

// segment split into four equal pieces so kinks at quarter points fall on piece ends
fn split_segment(from: (f64, f64), to: (f64, f64), mass: f64) -> Vec<MeasureComponent> {
    (0..4)
        .map(|k| MeasureComponent::Segment {
            from: lerp(from, to, k as f64 / 4.0),
            to: lerp(from, to, (k + 1) as f64 / 4.0),
            mass: mass / 4.0,
        })
        .collect()
}

/// Lebesgue measure on the unit square, split into sixteen triangles whose
/// edges follow the kink lines of M, W and V.
pub fn descriptor_pi_with_order(order: usize) -> MeasureDescriptor {
    let mut comps = Vec::with_capacity(16);
    for (x0, y0) in [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)] {
        let corners = [(x0, y0), (x0 + 0.5, y0), (x0 + 0.5, y0 + 0.5), (x0, y0 + 0.5)];
        let c = (x0 + 0.25, y0 + 0.25);
        for k in 0..4 {
            comps.push(MeasureComponent::Panel {
                vertices: [c, corners[k], corners[(k + 1) % 4]],
                mass: 1.0 / 16.0,
            });
        }
    }
    MeasureDescriptor::new(comps, order)
}

pub fn descriptor_pi() -> MeasureDescriptor {
    descriptor_pi_with_order(DEFAULT_ORDER)
}

/// Mass 1 uniformly on the main diagonal.
pub fn descriptor_upper() -> MeasureDescriptor {
    MeasureDescriptor::new(split_segment((0.0, 0.0), (1.0, 1.0), 1.0), DEFAULT_ORDER)
}

/// Mass 1 uniformly on the anti-diagonal.
pub fn descriptor_lower() -> MeasureDescriptor {
    MeasureDescriptor::new(split_segment((0.0, 1.0), (1.0, 0.0), 1.0), DEFAULT_ORDER)
}

/// Both diagonals with mass 1/2 each.
pub fn descriptor_mgamma() -> MeasureDescriptor {
    let mut comps = split_segment((0.0, 0.0), (1.0, 1.0), 0.5);
    comps.extend(split_segment((0.0, 1.0), (1.0, 0.0), 0.5));
    MeasureDescriptor::new(comps, DEFAULT_ORDER)
}

/// The four edges of the diamond with vertices (1/2,0), (1,1/2), (1/2,1),
/// (0,1/2), mass 1/4 each.
pub fn descriptor_v() -> MeasureDescriptor {
    let d = [(0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5)];
    let mut comps = Vec::new();
    for k in 0..4 {
        comps.extend(split_segment(d[k], d[(k + 1) % 4], 0.25));
    }
    MeasureDescriptor::new(comps, DEFAULT_ORDER)
}

/// `α μ_{M_Γ} + (1 - α) μ_Π`.
pub fn descriptor_mix(alpha: f64) -> MeasureDescriptor {
    MeasureDescriptor::combine(&[(alpha, &descriptor_mgamma()), (1.0 - alpha, &descriptor_pi())])
}
