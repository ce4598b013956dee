use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{LevyMeasureSpec, SmallJumpFamily};
use crate::solver::{AssumptionFlags, CoefficientSet};

/// Catalog entry: a coefficient family, its knobs with defaults, the rate
/// function L(t) it ships with and the assumption claims it makes.
#[derive(Clone, Debug, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub rate: &'static str,
    pub flags: AssumptionFlags,
}

const ALL_CLAIMS: AssumptionFlags = AssumptionFlags {
    lipschitz_claimed: true,
    growth_claimed: true,
    h_growth_claimed: true,
    g_square_growth_claimed: true,
};

pub fn preset_catalog() -> Vec<PresetInfo> {
    vec![
        PresetInfo {
            name: "zero",
            summary: "f = 0, g = 0, h = 0",
            params: &[],
            rate: "L = 0",
            flags: ALL_CLAIMS,
        },
        PresetInfo {
            name: "linear",
            summary: "f = -a*u, g = s*u*z1 on |z|<1, h = r*u*z1 on |z|>=1",
            params: &[("a", 1.0), ("s", 1.0), ("r", 1.0)],
            rate: "L = max(a, r)",
            flags: ALL_CLAIMS,
        },
        PresetInfo {
            name: "additive",
            summary: "f = b - a*u, g = s*z1, h = r*z1",
            params: &[("a", 1.0), ("b", 0.0), ("s", 1.0), ("r", 1.0)],
            rate: "L = max(a, |b|, r)",
            flags: ALL_CLAIMS,
        },
        PresetInfo {
            name: "pure_jump",
            summary: "f = 0, g = 0, h = r*z1",
            params: &[("r", 1.0)],
            rate: "L = r",
            flags: ALL_CLAIMS,
        },
        PresetInfo {
            name: "sine_drift",
            summary: "f = a*sin(u) + b*cos(omega*t), g = s*sin(u)*z1, h = r*z1",
            params: &[
                ("a", 1.0),
                ("b", 1.0),
                ("omega", std::f64::consts::TAU),
                ("s", 0.5),
                ("r", 0.5),
            ],
            rate: "L = max(a, |b|, r)",
            flags: ALL_CLAIMS,
        },
    ]
}

pub fn find_preset(name: &str) -> Option<PresetInfo> {
    preset_catalog().into_iter().find(|p| p.name == name)
}

/// Human-readable catalog listing.
pub fn list_presets() -> String {
    let mut out = String::new();
    for p in preset_catalog() {
        out.push_str(&format!("{}\n  {}\n  {}\n", p.name, p.summary, p.rate));
        if !p.params.is_empty() {
            let knobs: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("  params: {}\n", knobs.join(", ")));
        }
        let f = p.flags;
        out.push_str(&format!(
            "  claims: lipschitz={} growth={} h_growth={} g_square_growth={}\n",
            f.lipschitz_claimed, f.growth_claimed, f.h_growth_claimed, f.g_square_growth_claimed
        ));
    }
    out
}

/// ∫_{ε≤|z|<1} z₁ ν(dz); zero for the isotropic families.
fn small_first_moment(levy: &LevyMeasureSpec) -> f64 {
    match levy.small {
        SmallJumpFamily::None | SmallJumpFamily::StableLike { .. } | SmallJumpFamily::AnnulusUniform { .. } => 0.0,
        SmallJumpFamily::FiniteAtoms { ref atoms } => atoms.iter().map(|a| a.weight * a.mark[0]).sum(),
    }
}

/// Builds the coefficient set of preset `name`. Unknown presets and unknown
/// parameter names are reported against the config field that holds them.
pub fn build_coefficients(
    name: &str,
    params: &BTreeMap<String, f64>,
    levy: &LevyMeasureSpec,
) -> Result<CoefficientSet> {
    let info = find_preset(name).ok_or_else(|| {
        let known: Vec<&str> = preset_catalog().iter().map(|p| p.name).collect();
        Error::config(
            "problem.coefficients.preset",
            format!("unknown preset `{name}` (known: {})", known.join(", ")),
        )
    })?;
    for (k, v) in params {
        if !info.params.iter().any(|(n, _)| n == k) {
            return Err(Error::config(
                format!("problem.coefficients.params.{k}"),
                format!("preset `{name}` has no parameter `{k}`"),
            ));
        }
        if !v.is_finite() {
            return Err(Error::config(
                format!("problem.coefficients.params.{k}"),
                "must be finite",
            ));
        }
    }
    let get = |k: &str| -> f64 {
        params
            .get(k)
            .copied()
            .or_else(|| info.params.iter().find(|(n, _)| *n == k).map(|(_, v)| *v))
            .expect("parameter declared in catalog")
    };
    for k in ["a", "s", "r"] {
        if info.params.iter().any(|(n, _)| *n == k) && get(k) < 0.0 {
            return Err(Error::config(
                format!("problem.coefficients.params.{k}"),
                "must be >= 0",
            ));
        }
    }
    let m1 = small_first_moment(levy);
    let coeffs = match name {
        "zero" => CoefficientSet::zero(),
        "linear" => {
            let (a, s, r) = (get("a"), get("s"), get("r"));
            CoefficientSet::new(move |_, u| -a * u)
                .with_g(move |_, u, z| s * u * z[0])
                .with_h(move |_, u, z| r * u * z[0])
                .with_compensator(move |_, u| s * u * m1)
                .with_rate(move |_| a.max(r))
        }
        "additive" => {
            let (a, b, s, r) = (get("a"), get("b"), get("s"), get("r"));
            CoefficientSet::new(move |_, u| b - a * u)
                .with_g(move |_, _, z| s * z[0])
                .with_h(move |_, _, z| r * z[0])
                .with_compensator(move |_, _| s * m1)
                .with_rate(move |_| a.max(b.abs()).max(r))
        }
        "pure_jump" => {
            let r = get("r");
            CoefficientSet::new(|_, _| 0.0)
                .with_h(move |_, _, z| r * z[0])
                .with_rate(move |_| r)
        }
        "sine_drift" => {
            let (a, b, w, s, r) = (get("a"), get("b"), get("omega"), get("s"), get("r"));
            CoefficientSet::new(move |t, u| a * u.sin() + b * (w * t).cos())
                .with_g(move |_, u, z| s * u.sin() * z[0])
                .with_h(move |_, _, z| r * z[0])
                .with_compensator(move |_, u| s * u.sin() * m1)
                .with_rate(move |_| a.max(b.abs()).max(r))
        }
        _ => unreachable!("catalog and builder disagree on `{name}`"),
    };
    Ok(coeffs.with_flags(info.flags))
}

/// Linear drift rate c in f(t,u) = c·u when the preset has one and no
/// constant part, used by the exponential convergence reference.
pub(crate) fn linear_drift_rate(name: &str, params: &BTreeMap<String, f64>) -> Option<f64> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    match name {
        "zero" => Some(0.0),
        "linear" => Some(-get("a", 1.0)),
        "additive" if get("b", 0.0) == 0.0 => Some(-get("a", 1.0)),
        _ => None,
    }
}
