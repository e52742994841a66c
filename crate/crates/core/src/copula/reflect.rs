use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{Copula, CopulaModel, Family};

/// Element of the eight-element group generated by the coordinate swap π
/// and the partial reflection ν₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectionTag {
    Identity,
    Nu1,
    Nu2,
    Nu,
    Pi,
    PiNu1,
    PiNu2,
    PiNu,
}

impl ReflectionTag {
    pub const ALL: [ReflectionTag; 8] = [
        ReflectionTag::Identity,
        ReflectionTag::Nu1,
        ReflectionTag::Nu2,
        ReflectionTag::Nu,
        ReflectionTag::Pi,
        ReflectionTag::PiNu1,
        ReflectionTag::PiNu2,
        ReflectionTag::PiNu,
    ];

    /// `(swap, flip first, flip second)`: the point map first swaps the
    /// coordinates (if requested) and then reflects them.
    pub fn action(self) -> (bool, bool, bool) {
        match self {
            ReflectionTag::Identity => (false, false, false),
            ReflectionTag::Nu1 => (false, true, false),
            ReflectionTag::Nu2 => (false, false, true),
            ReflectionTag::Nu => (false, true, true),
            ReflectionTag::Pi => (true, false, false),
            ReflectionTag::PiNu1 => (true, false, true),
            ReflectionTag::PiNu2 => (true, true, false),
            ReflectionTag::PiNu => (true, true, true),
        }
    }

    /// Image of a point of the unit square.
    pub fn map_point(self, (x, y): (f64, f64)) -> (f64, f64) {
        let (swap, f1, f2) = self.action();
        let (mut a, mut b) = if swap { (y, x) } else { (x, y) };
        if f1 {
            a = 1.0 - a;
        }
        if f2 {
            b = 1.0 - b;
        }
        (a, b)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: ReflectionTag) -> ReflectionTag {
        // dyadic probe point keeps every reflection exact
        let p = (0.125, 0.3125);
        let target = self.map_point(other.map_point(p));
        Self::ALL
            .into_iter()
            .find(|g| g.map_point(p) == target)
            .expect("group is closed")
    }

    pub fn inverse(self) -> ReflectionTag {
        Self::ALL
            .into_iter()
            .find(|g| g.compose(self) == ReflectionTag::Identity)
            .expect("every element has an inverse")
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ReflectionTag::Identity => "id",
            ReflectionTag::Nu1 => "nu1",
            ReflectionTag::Nu2 => "nu2",
            ReflectionTag::Nu => "nu",
            ReflectionTag::Pi => "pi",
            ReflectionTag::PiNu1 => "pi.nu1",
            ReflectionTag::PiNu2 => "pi.nu2",
            ReflectionTag::PiNu => "pi.nu",
        }
    }
}

impl fmt::Display for ReflectionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone)]
struct Reflected {
    base: CopulaModel,
    tag: ReflectionTag,
}

fn before(x: f64) -> f64 {
    if x <= 0.0 {
        -1.0
    } else {
        x.next_down()
    }
}

impl Reflected {
    fn base_cdf(&self, s: f64, t: f64) -> f64 {
        if self.tag.action().0 {
            self.base.cdf(t, s)
        } else {
            self.base.cdf(s, t)
        }
    }

    fn base_density(&self, s: f64, t: f64) -> Option<f64> {
        if self.tag.action().0 {
            self.base.density(t, s)
        } else {
            self.base.density(s, t)
        }
    }

    // P(V' <= t | U' = s) for the swapped-but-unreflected copula
    fn base_kernel(&self, s: f64, t: f64) -> Option<f64> {
        if self.tag.action().0 {
            self.base.kernel_v(t, s)
        } else {
            self.base.kernel(s, t)
        }
    }

    // P(U' <= s | V' = t)
    fn base_kernel_v(&self, s: f64, t: f64) -> Option<f64> {
        if self.tag.action().0 {
            self.base.kernel(t, s)
        } else {
            self.base.kernel_v(s, t)
        }
    }
}

impl Copula for Reflected {
    fn family(&self) -> Family {
        Family::Reflected
    }

    fn params(&self) -> Vec<f64> {
        self.base.params()
    }

    fn cdf(&self, x: f64, y: f64) -> f64 {
        let (_, f1, f2) = self.tag.action();
        match (f1, f2) {
            (false, false) => self.base_cdf(x, y),
            (true, false) => y - self.base_cdf(1.0 - x, y),
            (false, true) => x - self.base_cdf(x, 1.0 - y),
            (true, true) => x + y - 1.0 + self.base_cdf(1.0 - x, 1.0 - y),
        }
    }

    fn density(&self, x: f64, y: f64) -> Option<f64> {
        let (_, f1, f2) = self.tag.action();
        let s = if f1 { 1.0 - x } else { x };
        let t = if f2 { 1.0 - y } else { y };
        self.base_density(s, t)
    }

    fn kernel(&self, x: f64, y: f64) -> Option<f64> {
        let (_, f1, f2) = self.tag.action();
        let s = if f1 { 1.0 - x } else { x };
        if f2 {
            Some(1.0 - self.base_kernel(s, before(1.0 - y))?)
        } else {
            self.base_kernel(s, y)
        }
    }

    fn kernel_v(&self, x: f64, y: f64) -> Option<f64> {
        let (_, f1, f2) = self.tag.action();
        let t = if f2 { 1.0 - y } else { y };
        if f1 {
            Some(1.0 - self.base_kernel_v(before(1.0 - x), t)?)
        } else {
            self.base_kernel_v(x, t)
        }
    }

    fn has_sampler(&self) -> bool {
        self.base.can_sample()
    }

    fn sample_pair(&self, rng: &mut dyn RngCore) -> Option<(f64, f64)> {
        self.base.sample_pair(rng).map(|p| self.tag.map_point(p))
    }

    fn accuracy(&self) -> f64 {
        self.base.accuracy()
    }

    fn reflection_parts(&self) -> Option<(CopulaModel, ReflectionTag)> {
        Some((self.base.clone(), self.tag))
    }
}

/// Image of `c` under `g`. Nested reflections are collapsed to a single
/// wrapper over the original base.
pub fn reflect(c: &CopulaModel, g: ReflectionTag) -> CopulaModel {
    if g == ReflectionTag::Identity {
        return c.clone();
    }
    if let Some((base, prev)) = as_reflected(c) {
        let tag = g.compose(prev);
        if tag == ReflectionTag::Identity {
            return base;
        }
        return CopulaModel::new(Reflected { base, tag });
    }
    CopulaModel::new(Reflected {
        base: c.clone(),
        tag: g,
    })
}

fn as_reflected(c: &CopulaModel) -> Option<(CopulaModel, ReflectionTag)> {
    c.inner().reflection_parts()
}
