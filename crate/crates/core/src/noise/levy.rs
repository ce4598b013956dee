use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;
use crate::specfun::gamma_pos;

/// A point mass of ν.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub mark: Vec<f64>,
    pub weight: f64,
}

/// ν restricted to {0 < |z| < 1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmallJumpFamily {
    None,
    /// Isotropic density c|z|^{−d−β}, β ∈ (0,2); for d = 1 this is c|z|^{−1−β}.
    StableLike {
        c: f64,
        beta: f64,
    },
    /// Total mass `mass` spread uniformly (Lebesgue) over the ε-annulus.
    AnnulusUniform {
        mass: f64,
    },
    FiniteAtoms {
        atoms: Vec<Atom>,
    },
}

/// ν restricted to {|z| ≥ 1}, a finite measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LargeJumpLaw {
    None,
    /// Mass Λ with radial tail P(|z| > r) = r^{−tail_index}, uniform direction.
    Pareto {
        mass: f64,
        tail_index: f64,
    },
    /// Mass Λ on the sphere |z| = radius, uniform direction.
    Sphere {
        mass: f64,
        radius: f64,
    },
    FiniteAtoms {
        atoms: Vec<Atom>,
    },
}

fn default_mark_dim() -> usize {
    1
}

fn default_epsilon() -> f64 {
    1e-2
}

fn default_quadrature_nodes() -> usize {
    256
}

/// Lévy measure ν split at |z| = 1 and truncated below |z| = ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasureSpec {
    #[serde(default = "default_mark_dim")]
    pub mark_dim: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub small: SmallJumpFamily,
    pub large: LargeJumpLaw,
    /// Nodes per mark dimension of the compensator quadrature.
    #[serde(default = "default_quadrature_nodes")]
    pub quadrature_nodes: usize,
}

impl LevyMeasureSpec {
    pub fn new(mark_dim: usize, epsilon: f64, small: SmallJumpFamily, large: LargeJumpLaw) -> Result<Self> {
        let spec = Self {
            mark_dim,
            epsilon,
            small,
            large,
            quadrature_nodes: default_quadrature_nodes(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The zero measure (no jumps at all).
    pub fn none() -> Self {
        Self {
            mark_dim: 1,
            epsilon: default_epsilon(),
            small: SmallJumpFamily::None,
            large: LargeJumpLaw::None,
            quadrature_nodes: default_quadrature_nodes(),
        }
    }

    /// Splits one atom list at |z| = 1 into the small and large parts.
    pub fn from_atoms(mark_dim: usize, epsilon: f64, atoms: Vec<Atom>) -> Result<Self> {
        let (large, small): (Vec<Atom>, Vec<Atom>) = atoms.into_iter().partition(|a| norm(&a.mark) >= 1.0);
        let small = if small.is_empty() {
            SmallJumpFamily::None
        } else {
            SmallJumpFamily::FiniteAtoms { atoms: small }
        };
        let large = if large.is_empty() {
            LargeJumpLaw::None
        } else {
            LargeJumpLaw::FiniteAtoms { atoms: large }
        };
        Self::new(mark_dim, epsilon, small, large)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mark_dim == 0 {
            return Err(Error::domain("mark dimension must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::domain(format!(
                "epsilon must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        if self.quadrature_nodes == 0 {
            return Err(Error::domain("quadrature_nodes must be positive"));
        }
        let check_atoms = |atoms: &[Atom], small: bool| -> Result<()> {
            for a in atoms {
                if a.mark.len() != self.mark_dim {
                    return Err(Error::domain(format!(
                        "atom mark {:?} does not have dimension {}",
                        a.mark, self.mark_dim
                    )));
                }
                if !(a.weight >= 0.0) || !a.weight.is_finite() {
                    return Err(Error::domain(format!(
                        "atom weight must be finite and >= 0, got {}",
                        a.weight
                    )));
                }
                let r = norm(&a.mark);
                if r == 0.0 {
                    return Err(Error::domain("nu must not charge the origin"));
                }
                if small && r >= 1.0 {
                    return Err(Error::domain(format!("small-jump atom {:?} has |z| >= 1", a.mark)));
                }
                if !small && r < 1.0 {
                    return Err(Error::domain(format!("large-jump atom {:?} has |z| < 1", a.mark)));
                }
            }
            Ok(())
        };
        match &self.small {
            SmallJumpFamily::None => {}
            SmallJumpFamily::StableLike { c, beta } => {
                if !(*c >= 0.0) || !(*beta > 0.0 && *beta < 2.0) {
                    return Err(Error::domain(format!(
                        "stable_like needs c >= 0 and beta in (0,2), got c = {c}, beta = {beta}"
                    )));
                }
            }
            SmallJumpFamily::AnnulusUniform { mass } => {
                if !(*mass >= 0.0) || !mass.is_finite() {
                    return Err(Error::domain(format!(
                        "annulus mass must be finite and >= 0, got {mass}"
                    )));
                }
            }
            SmallJumpFamily::FiniteAtoms { atoms } => check_atoms(atoms, true)?,
        }
        match &self.large {
            LargeJumpLaw::None => {}
            LargeJumpLaw::Pareto { mass, tail_index } => {
                if !(*mass >= 0.0) || !mass.is_finite() || !(*tail_index > 0.0) {
                    return Err(Error::domain(format!(
                        "pareto large jumps need finite mass >= 0 and tail_index > 0, got {mass}, {tail_index}"
                    )));
                }
            }
            LargeJumpLaw::Sphere { mass, radius } => {
                if !(*mass >= 0.0) || !mass.is_finite() || !(*radius >= 1.0) {
                    return Err(Error::domain(format!(
                        "sphere large jumps need finite mass >= 0 and radius >= 1, got {mass}, {radius}"
                    )));
                }
            }
            LargeJumpLaw::FiniteAtoms { atoms } => check_atoms(atoms, false)?,
        }
        Ok(())
    }

    /// Surface measure of the unit sphere in ℝ^d (2 for d = 1).
    pub fn sphere_area(&self) -> f64 {
        let d = self.mark_dim as f64;
        2.0 * PI.powf(0.5 * d) / gamma_pos(0.5 * d)
    }

    /// λ_ε = ν({ε ≤ |z| < 1}).
    pub fn small_mass(&self) -> f64 {
        let eps = self.epsilon;
        match &self.small {
            SmallJumpFamily::None => 0.0,
            SmallJumpFamily::StableLike { c, beta } => self.sphere_area() * c * (eps.powf(-beta) - 1.0) / beta,
            SmallJumpFamily::AnnulusUniform { mass } => *mass,
            SmallJumpFamily::FiniteAtoms { atoms } => {
                atoms.iter().filter(|a| norm(&a.mark) >= eps).map(|a| a.weight).sum()
            }
        }
    }

    /// Λ = ν({|z| ≥ 1}).
    pub fn large_mass(&self) -> f64 {
        match &self.large {
            LargeJumpLaw::None => 0.0,
            LargeJumpLaw::Pareto { mass, .. } | LargeJumpLaw::Sphere { mass, .. } => *mass,
            LargeJumpLaw::FiniteAtoms { atoms } => atoms.iter().map(|a| a.weight).sum(),
        }
    }

    /// ∫_{|z|<1} |z|² ν(dz) (untruncated), finite for every built-in family.
    pub fn small_second_moment(&self) -> f64 {
        match &self.small {
            SmallJumpFamily::None => 0.0,
            SmallJumpFamily::StableLike { c, beta } => self.sphere_area() * c / (2.0 - beta),
            SmallJumpFamily::AnnulusUniform { mass } => {
                let d = self.mark_dim as f64;
                let e = self.epsilon;
                mass * d / (d + 2.0) * (1.0 - e.powf(d + 2.0)) / (1.0 - e.powf(d))
            }
            SmallJumpFamily::FiniteAtoms { atoms } => atoms.iter().map(|a| a.weight * norm2(&a.mark)).sum(),
        }
    }

    /// ∫_{ε≤|z|<1} z₁² ν(dz), the variance rate of the first mark coordinate
    /// over the simulated small jumps.
    pub fn small_axis_second_moment(&self) -> f64 {
        let d = self.mark_dim as f64;
        let e = self.epsilon;
        match &self.small {
            SmallJumpFamily::None => 0.0,
            SmallJumpFamily::StableLike { c, beta } => {
                self.sphere_area() * c * (1.0 - e.powf(2.0 - beta)) / (2.0 - beta) / d
            }
            SmallJumpFamily::AnnulusUniform { .. } => self.small_second_moment() / d,
            SmallJumpFamily::FiniteAtoms { atoms } => atoms
                .iter()
                .filter(|a| norm(&a.mark) >= e)
                .map(|a| a.weight * a.mark[0] * a.mark[0])
                .sum(),
        }
    }

    /// ∫ (1 ∧ |z|²) ν(dz).
    pub fn levy_integral(&self) -> f64 {
        self.small_second_moment() + self.large_mass()
    }

    /// Fixed quadrature for ∫_{ε≤|z|<1} φ(z) ν(dz).
    pub fn small_quadrature(&self) -> MarkQuadrature {
        MarkQuadrature::build(self, self.quadrature_nodes)
    }

    /// Draws one mark from ν restricted to {ε ≤ |z| < 1}, normalised.
    pub(crate) fn sample_small_mark<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let eps = self.epsilon;
        let d = self.mark_dim;
        match &self.small {
            SmallJumpFamily::None => unreachable!("no small jumps to sample"),
            SmallJumpFamily::StableLike { beta, .. } => {
                let u: f64 = rng.random();
                let top = eps.powf(-beta);
                let r = (top - u * (top - 1.0)).powf(-1.0 / beta);
                scaled_direction(rng, d, r.clamp(eps, 1.0 - f64::EPSILON))
            }
            SmallJumpFamily::AnnulusUniform { .. } => {
                let u: f64 = rng.random();
                let df = d as f64;
                let r = (eps.powf(df) + u * (1.0 - eps.powf(df))).powf(1.0 / df);
                scaled_direction(rng, d, r.clamp(eps, 1.0 - f64::EPSILON))
            }
            SmallJumpFamily::FiniteAtoms { atoms } => pick_atom(rng, atoms.iter().filter(|a| norm(&a.mark) >= eps)),
        }
    }

    pub(crate) fn sample_large_mark<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.mark_dim;
        match &self.large {
            LargeJumpLaw::None => unreachable!("no large jumps to sample"),
            LargeJumpLaw::Pareto { tail_index, .. } => {
                let u: f64 = rng.random();
                let r = (1.0 - u).powf(-1.0 / tail_index);
                scaled_direction(rng, d, r)
            }
            LargeJumpLaw::Sphere { radius, .. } => scaled_direction(rng, d, *radius),
            LargeJumpLaw::FiniteAtoms { atoms } => pick_atom(rng, atoms.iter()),
        }
    }
}

fn pick_atom<'a, R: Rng + ?Sized>(rng: &mut R, atoms: impl Iterator<Item = &'a Atom> + Clone) -> Vec<f64> {
    let total: f64 = atoms.clone().map(|a| a.weight).sum();
    let mut x = rng.random::<f64>() * total;
    let mut last = None;
    for a in atoms {
        if a.weight > 0.0 {
            last = Some(a);
            if x < a.weight {
                return a.mark.clone();
            }
            x -= a.weight;
        }
    }
    last.expect("atom list with positive mass").mark.clone()
}

fn scaled_direction<R: Rng + ?Sized>(rng: &mut R, d: usize, r: f64) -> Vec<f64> {
    if d == 1 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return vec![sign * r];
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| r * x / n).collect();
        }
    }
}

pub(crate) fn norm(z: &[f64]) -> f64 {
    norm2(z).sqrt()
}

fn norm2(z: &[f64]) -> f64 {
    z.iter().map(|x| x * x).sum()
}

/// Weighted mark nodes for ∫_{ε≤|z|<1} φ(z) ν(dz); weights include ν.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkQuadrature {
    dim: usize,
    marks: Vec<f64>,
    weights: Vec<f64>,
}

impl MarkQuadrature {
    /// Radial Gauss-Legendre rule (in log r for stable_like) times a
    /// direction rule: ±1 for d = 1, equispaced angles for d = 2, a Fibonacci
    /// lattice for d = 3, and a fixed-seed random design beyond.
    pub fn build(spec: &LevyMeasureSpec, nodes: usize) -> Self {
        let d = spec.mark_dim;
        let eps = spec.epsilon;
        let mut q = Self {
            dim: d,
            marks: Vec::new(),
            weights: Vec::new(),
        };
        let radial: Vec<(f64, f64)> = match &spec.small {
            SmallJumpFamily::None => Vec::new(),
            SmallJumpFamily::StableLike { c, beta } => {
                // r = e^v; ν radial part c r^{−1−β} dr = c r^{−β} dv
                let (v, w) = gauss_legendre_on(nodes, eps.ln(), 0.0);
                v.iter()
                    .zip(&w)
                    .map(|(v, w)| {
                        let r = v.exp();
                        (r, w * c * r.powf(-beta))
                    })
                    .collect()
            }
            SmallJumpFamily::AnnulusUniform { mass } => {
                let df = d as f64;
                let norm_c = mass * df / ((1.0 - eps.powf(df)) * spec.sphere_area());
                let (r, w) = gauss_legendre_on(nodes, eps, 1.0);
                r.iter()
                    .zip(&w)
                    .map(|(r, w)| (*r, w * norm_c * r.powf(df - 1.0)))
                    .collect()
            }
            SmallJumpFamily::FiniteAtoms { atoms } => {
                for a in atoms.iter().filter(|a| norm(&a.mark) >= eps) {
                    q.marks.extend_from_slice(&a.mark);
                    q.weights.push(a.weight);
                }
                return q;
            }
        };
        let dirs = direction_rule(d, nodes, spec.sphere_area());
        for (r, wr) in &radial {
            for (dir, wd) in &dirs {
                q.marks.extend(dir.iter().map(|x| r * x));
                q.weights.push(wr * wd);
            }
        }
        q
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, mut phi: impl FnMut(&[f64]) -> f64) -> f64 {
        self.marks
            .chunks_exact(self.dim)
            .zip(&self.weights)
            .map(|(z, w)| w * phi(z))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

// Directions with weights summing to the sphere area.
fn direction_rule(d: usize, nodes: usize, area: f64) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => (0..nodes)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / nodes as f64;
                (vec![th.cos(), th.sin()], area / nodes as f64)
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..nodes)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / nodes as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    (vec![rho * th.cos(), rho * th.sin(), z], area / nodes as f64)
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1ec);
            (0..nodes)
                .map(|_| (scaled_direction(&mut rng, d, 1.0), area / nodes as f64))
                .collect()
        }
    }
}

/// ∫_{ε≤|z|<1} g(t, u, z) ν(dz) by the spec's fixed quadrature rule.
pub fn compensator_integral(spec: &LevyMeasureSpec, g: impl Fn(f64, f64, &[f64]) -> f64, t: f64, u: f64) -> f64 {
    spec.small_quadrature().integrate(|z| g(t, u, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stable(c: f64, beta: f64, eps: f64) -> LevyMeasureSpec {
        LevyMeasureSpec::new(1, eps, SmallJumpFamily::StableLike { c, beta }, LargeJumpLaw::None).unwrap()
    }

    #[test]
    fn stable_like_small_mass() {
        let s = stable(1.0, 0.5, 0.01);
        assert!((s.small_mass() - 36.0).abs() < 1e-12);
        // the quadrature integrates the constant 1 to the same mass
        assert!((s.small_quadrature().total_mass() - 36.0).abs() < 1e-10);
    }

    #[test]
    fn atom_masses() {
        let s = LevyMeasureSpec::from_atoms(
            1,
            0.01,
            vec![
                Atom {
                    mark: vec![1.5],
                    weight: 0.7,
                },
                Atom {
                    mark: vec![-2.0],
                    weight: 0.3,
                },
            ],
        )
        .unwrap();
        assert_eq!(s.small_mass(), 0.0);
        assert!((s.large_mass() - 1.0).abs() < 1e-15);
        let mixed = LevyMeasureSpec::from_atoms(
            1,
            0.1,
            vec![
                Atom {
                    mark: vec![0.5],
                    weight: 2.0,
                },
                Atom {
                    mark: vec![0.05],
                    weight: 9.0,
                },
                Atom {
                    mark: vec![3.0],
                    weight: 0.5,
                },
            ],
        )
        .unwrap();
        // the atom below ε is truncated away
        assert_eq!(mixed.small_mass(), 2.0);
        assert_eq!(mixed.large_mass(), 0.5);
    }

    #[test]
    fn annulus_mass() {
        for d in 1..=3 {
            let s = LevyMeasureSpec::new(
                d,
                0.2,
                SmallJumpFamily::AnnulusUniform { mass: 4.0 },
                LargeJumpLaw::None,
            )
            .unwrap();
            assert_eq!(s.small_mass(), 4.0);
            assert!((s.small_quadrature().total_mass() - 4.0).abs() < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn compensator_examples() {
        let s = stable(1.0, 0.5, 0.01);
        assert_eq!(compensator_integral(&s, |_, _, _| 0.0, 0.3, 1.0), 0.0);
        let odd = compensator_integral(&s, |_, _, z| z[0], 0.3, 1.0);
        assert!(odd.abs() < 1e-13);
        let abs = compensator_integral(&s, |_, _, z| z[0].abs(), 0.3, 1.0);
        assert!((abs - 3.6).abs() < 1e-10, "{abs}");
        // ∫ z² ν over the annulus: 2 ∫_{ε}^1 z^{1/2} dz
        let sq = compensator_integral(&s, |_, _, z| z[0] * z[0], 0.0, 0.0);
        let want = 2.0 * (2.0 / 3.0) * (1.0 - 0.01f64.powf(1.5));
        assert!((sq - want).abs() < 1e-10);
    }

    #[test]
    fn stable_mass_in_higher_dimensions() {
        for d in 2..=4 {
            let s = LevyMeasureSpec::new(
                d,
                0.05,
                SmallJumpFamily::StableLike { c: 0.5, beta: 1.2 },
                LargeJumpLaw::None,
            )
            .unwrap();
            let q = s.small_quadrature();
            assert!(
                (q.total_mass() - s.small_mass()).abs() < 1e-9 * s.small_mass(),
                "d = {d}"
            );
        }
    }

    #[test]
    fn rejects_invalid_measures() {
        assert!(LevyMeasureSpec::new(1, 0.0, SmallJumpFamily::None, LargeJumpLaw::None).is_err());
        assert!(LevyMeasureSpec::new(1, 1.0, SmallJumpFamily::None, LargeJumpLaw::None).is_err());
        assert!(LevyMeasureSpec::new(
            1,
            0.1,
            SmallJumpFamily::StableLike { c: 1.0, beta: 2.0 },
            LargeJumpLaw::None
        )
        .is_err());
        let bad_small = SmallJumpFamily::FiniteAtoms {
            atoms: vec![Atom {
                mark: vec![1.2],
                weight: 1.0,
            }],
        };
        assert!(LevyMeasureSpec::new(1, 0.1, bad_small, LargeJumpLaw::None).is_err());
        let origin = SmallJumpFamily::FiniteAtoms {
            atoms: vec![Atom {
                mark: vec![0.0],
                weight: 1.0,
            }],
        };
        assert!(LevyMeasureSpec::new(1, 0.1, origin, LargeJumpLaw::None).is_err());
        assert!(LevyMeasureSpec::new(
            1,
            0.1,
            SmallJumpFamily::None,
            LargeJumpLaw::Sphere { mass: 1.0, radius: 0.5 }
        )
        .is_err());
    }

    #[test]
    fn levy_integral_is_finite() {
        let s = LevyMeasureSpec::new(
            1,
            0.01,
            SmallJumpFamily::StableLike { c: 1.0, beta: 1.5 },
            LargeJumpLaw::Pareto {
                mass: 2.0,
                tail_index: 3.0,
            },
        )
        .unwrap();
        assert!((s.levy_integral() - (2.0 / 0.5 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn sampled_marks_respect_classes() {
        let s = LevyMeasureSpec::new(
            2,
            0.05,
            SmallJumpFamily::StableLike { c: 1.0, beta: 0.8 },
            LargeJumpLaw::Pareto {
                mass: 1.0,
                tail_index: 2.0,
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let z = s.sample_small_mark(&mut rng);
            let r = norm(&z);
            assert!((0.05 * (1.0 - 1e-12)..1.0).contains(&r), "{r}");
            assert!(norm(&s.sample_large_mark(&mut rng)) >= 1.0 - 1e-12);
        }
    }
}
