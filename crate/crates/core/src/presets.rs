//! The three reference members of the `cos X¹ + cos X² + cos X³` family.
//!
//! Rows are `[a_i, b_i, c_i]` of `cos(a_i x + b_i y + c_i)`, with `a_3 = 0`.

use crate::potential::QuasiPotential;

/// Regular open lines, zone `(1, 0, 0)`, open-line interval `±0.7493`.
pub const REGULAR_100: [[f64; 3]; 3] = [
    [
        -0.12251993420338196,
        -0.2250221718850486,
        1.5505542426422338,
    ],
    [
        0.9924660526802913,
        -0.02777898711920925,
        0.12374024573075965,
    ],
    [0.0, 0.9739575709622912, 3.1548761694687415],
];

/// Regular open lines, zone `(1, 1, 1)`, open-line interval `±0.7548`.
pub const REGULAR_111: [[f64; 3]; 3] = [
    [
        -0.6194151736623348,
        -0.44502823229775823,
        1.4421279589366298,
    ],
    [0.7850635914605004, -0.3511272752829312, 0.8986352554278761],
    [0.0, 0.8238079321117983, 2.3379002628621635],
];

/// Chaotic open lines, present only at the level `0`.
pub const CHAOTIC: [[f64; 3]; 3] = [
    [-0.6190763027420052, -0.2572674789786692, 1.311209111211166],
    [0.7853308419916342, -0.20280395367888493, 0.8662242771884692],
    [0.0, 0.9448195598272575, 2.950743051151684],
];

/// Reference open-line half-widths (`V₂ = −V₁`).
pub const REGULAR_100_V2: f64 = 0.7493;
pub const REGULAR_111_V2: f64 = 0.7548;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Regular100,
    Regular111,
    Chaotic,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Regular100, Preset::Regular111, Preset::Chaotic];

    pub fn coefficients(self) -> [[f64; 3]; 3] {
        match self {
            Preset::Regular100 => REGULAR_100,
            Preset::Regular111 => REGULAR_111,
            Preset::Chaotic => CHAOTIC,
        }
    }

    pub fn potential(self) -> QuasiPotential<f64> {
        QuasiPotential::from_coefficients(&self.coefficients())
            .expect("preset coefficients are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Regular100 => "regular-100",
            Preset::Regular111 => "regular-111",
            Preset::Chaotic => "chaotic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_axes_are_orthonormal() {
        for preset in Preset::ALL {
            let c = preset.coefficients();
            let a: Vec<f64> = c.iter().map(|r| r[0]).collect();
            let b: Vec<f64> = c.iter().map(|r| r[1]).collect();
            let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
            assert!((dot(&a, &a) - 1.0).abs() < 1e-12, "{preset:?}");
            assert!((dot(&b, &b) - 1.0).abs() < 1e-12, "{preset:?}");
            assert!(dot(&a, &b).abs() < 1e-12, "{preset:?}");
        }
    }

    #[test]
    fn origin_value_matches_term_by_term_sum() {
        for preset in Preset::ALL {
            let expected: f64 = preset.coefficients().iter().map(|r| r[2].cos()).sum();
            let got = preset.potential().evaluate([0.0, 0.0]);
            assert!((got - expected).abs() < 1e-15);
        }
    }
}
