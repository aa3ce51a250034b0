//! Magnetic field configurations.
//!
//! Two families are supported: the piecewise-constant sector field, equal to
//! `2·b1 < 0` on the sector `0 < arg z < α` and to `2` on its complement, and
//! general radially homogeneous fields `b(ψ)·r^s` whose angular profile is
//! stored as a conjugate-symmetric Fourier series.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::arg_0_2pi;
use crate::C64;

/// Relative tolerance for the conjugate-symmetry check on profile coefficients.
pub const CONJUGATE_TOL: f64 = 1e-12;

/// Piecewise-constant sector field with the positive level normalised to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSector")]
pub struct SectorFieldConfig {
    alpha: f64,
    b1: f64,
}

#[derive(Deserialize)]
struct RawSector {
    alpha: f64,
    b1: f64,
}

impl TryFrom<RawSector> for SectorFieldConfig {
    type Error = Error;
    fn try_from(raw: RawSector) -> Result<Self> {
        Self::new(raw.alpha, raw.b1)
    }
}

impl SectorFieldConfig {
    pub fn new(alpha: f64, b1: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(invalid(format!("sector angle must lie in (0, π), got {alpha}")));
        }
        if !(b1 < 0.0 && b1.is_finite()) {
            return Err(invalid(format!("b1 must be strictly negative, got {b1}")));
        }
        Ok(Self { alpha, b1 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    /// The positive level, fixed by normalisation.
    pub fn b2(&self) -> f64 {
        1.0
    }

    /// `c0 = b2 − b1 = 1 − b1`.
    pub fn c0(&self) -> f64 {
        1.0 - self.b1
    }

    /// Whether `z` lies in the open negative-field sector `0 < arg z < α`.
    /// Both bounding rays belong to the positive-field region.
    pub fn in_negative_sector(&self, z: C64) -> bool {
        let a = arg_0_2pi(z);
        a > 0.0 && a < self.alpha
    }

    /// `B(z)`: `2·b1` inside the sector, `2` elsewhere.
    pub fn value(&self, z: C64) -> Result<f64> {
        if z == C64::new(0.0, 0.0) {
            return Err(Error::Origin);
        }
        Ok(if self.in_negative_sector(z) {
            2.0 * self.b1
        } else {
            2.0 * self.b2()
        })
    }
}

/// Real angular profile stored as Fourier coefficients `c_n`, with
/// `c_{-n} = conj(c_n)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierProfile {
    coeffs: BTreeMap<i64, C64>,
}

impl FourierProfile {
    /// Builds a profile from an explicit list of `(n, c_n)`; every nonzero mode
    /// must appear together with its conjugate partner.
    pub fn new(coeffs: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(invalid(format!("non-finite coefficient at mode {n}")));
            }
            *map.entry(n).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let profile = Self { coeffs: map };
        profile.check_conjugate_symmetry()?;
        Ok(profile)
    }

    /// Builds a profile from the mean and the coefficients of positive modes;
    /// negative modes are filled in by conjugation.
    pub fn from_nonnegative(mean: f64, positive: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        map.insert(0, C64::new(mean, 0.0));
        for (n, c) in positive {
            if n <= 0 {
                return Err(invalid(format!("expected a positive mode index, got {n}")));
            }
            map.insert(n, c);
            map.insert(-n, c.conj());
        }
        Ok(Self { coeffs: map })
    }

    /// `a0 + Σ_n (a_n cos nψ + b_n sin nψ)`.
    pub fn from_cos_sin(a0: f64, cos: &[(i64, f64)], sin: &[(i64, f64)]) -> Result<Self> {
        let mut pos: BTreeMap<i64, C64> = BTreeMap::new();
        for &(n, a) in cos {
            *pos.entry(n).or_insert(C64::new(0.0, 0.0)) += C64::new(0.5 * a, 0.0);
        }
        for &(n, b) in sin {
            *pos.entry(n).or_insert(C64::new(0.0, 0.0)) += C64::new(0.0, -0.5 * b);
        }
        Self::from_nonnegative(a0, pos)
    }

    fn check_conjugate_symmetry(&self) -> Result<()> {
        for (&n, &c) in &self.coeffs {
            let partner = self.coeffs.get(&-n).copied().unwrap_or(C64::new(0.0, 0.0));
            let scale = c.norm().max(partner.norm()).max(1.0);
            if (c - partner.conj()).norm() > CONJUGATE_TOL * scale {
                return Err(invalid(format!(
                    "profile is not real: c_{n} = {c} but c_{} = {partner}",
                    -n
                )));
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, n: i64) -> C64 {
        self.coeffs.get(&n).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Iterates over stored `(n, c_n)` in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn mean(&self) -> f64 {
        self.coefficient(0).re
    }

    pub fn max_mode(&self) -> i64 {
        self.coeffs.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    /// Value of the `order`-th derivative at `psi`, by Fourier synthesis.
    pub fn derivative(&self, psi: f64, order: u32) -> f64 {
        let mut acc = if order == 0 { self.mean() } else { 0.0 };
        for (&n, &c) in self.coeffs.range(1..) {
            let nf = n as f64;
            // d^k/dψ^k e^{inψ} = (in)^k e^{inψ}
            let factor = C64::new(0.0, nf).powu(order);
            let e = C64::from_polar(1.0, nf * psi);
            acc += 2.0 * (c * factor * e).re;
        }
        acc
    }

    pub fn eval(&self, psi: f64) -> f64 {
        self.derivative(psi, 0)
    }

    /// `Σ_{n≠0} |n|^k |c_n|`, used for certified sup-norm tails.
    pub fn weighted_l1(&self, k: i32) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&n, _)| n != 0)
            .map(|(&n, c)| (n.abs() as f64).powi(k) * c.norm())
            .sum()
    }

    /// `[n, re, im]` triples, increasing in `n`.
    pub fn to_triples(&self) -> Vec<(i64, f64, f64)> {
        self.coeffs.iter().map(|(&n, c)| (n, c.re, c.im)).collect()
    }

    pub fn from_triples(triples: &[(i64, f64, f64)]) -> Result<Self> {
        Self::new(triples.iter().map(|&(n, re, im)| (n, C64::new(re, im))))
    }

    /// Mode-wise map `c_n ↦ f(n, c_n)`; the caller keeps the result real.
    pub(crate) fn map_modes(&self, mut f: impl FnMut(i64, C64) -> C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&n, &c)| (n, f(n, c))).collect(),
        }
    }
}

/// Radially homogeneous field `B = b(ψ)·r^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousFieldConfig {
    s: f64,
    profile: FourierProfile,
}

impl HomogeneousFieldConfig {
    pub fn new(s: f64, profile: FourierProfile) -> Result<Self> {
        if !(s > -2.0 && s <= 0.0) {
            return Err(invalid(format!("homogeneity degree must lie in (-2, 0], got {s}")));
        }
        Ok(Self { s, profile })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn profile(&self) -> &FourierProfile {
        &self.profile
    }

    /// Mean level `β0`, the zeroth Fourier coefficient.
    pub fn beta0(&self) -> f64 {
        self.profile.mean()
    }

    pub fn value(&self, z: C64) -> Result<f64> {
        let r = z.norm();
        if r == 0.0 {
            if self.s < 0.0 {
                return Err(Error::Origin);
            }
            // s = 0: direction-dependent at the origin; use the mean.
            return Ok(self.profile.mean());
        }
        let psi = z.im.atan2(z.re);
        Ok(self.profile.eval(psi) * r.powf(self.s))
    }
}

/// JSON document form of a field configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum FieldDoc {
    Sector { alpha: f64, b1: f64 },
    Homogeneous { s: f64, fourier: Vec<(i64, f64, f64)> },
}

/// Either field family; round-trips through
/// `{"kind":"sector","alpha":…,"b1":…}` or
/// `{"kind":"homogeneous","s":…,"fourier":[[n,re,im],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldDoc", into = "FieldDoc")]
pub enum FieldConfig {
    Sector(SectorFieldConfig),
    Homogeneous(HomogeneousFieldConfig),
}

impl TryFrom<FieldDoc> for FieldConfig {
    type Error = Error;
    fn try_from(doc: FieldDoc) -> Result<Self> {
        match doc {
            FieldDoc::Sector { alpha, b1 } => Ok(Self::Sector(SectorFieldConfig::new(alpha, b1)?)),
            FieldDoc::Homogeneous { s, fourier } => Ok(Self::Homogeneous(HomogeneousFieldConfig::new(
                s,
                FourierProfile::from_triples(&fourier)?,
            )?)),
        }
    }
}

impl From<FieldConfig> for FieldDoc {
    fn from(cfg: FieldConfig) -> Self {
        match cfg {
            FieldConfig::Sector(c) => FieldDoc::Sector {
                alpha: c.alpha,
                b1: c.b1,
            },
            FieldConfig::Homogeneous(h) => FieldDoc::Homogeneous {
                s: h.s,
                fourier: h.profile.to_triples(),
            },
        }
    }
}

impl FieldConfig {
    pub fn value(&self, z: C64) -> Result<f64> {
        match self {
            Self::Sector(c) => c.value(z),
            Self::Homogeneous(h) => h.value(z),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quarter() -> SectorFieldConfig {
        SectorFieldConfig::new(PI / 2.0, -1.0).unwrap()
    }

    #[test]
    fn sector_values_and_tie_break() {
        let cfg = quarter();
        assert_eq!(cfg.value(C64::from_polar(1.0, PI / 4.0)).unwrap(), -2.0);
        assert_eq!(cfg.value(C64::from_polar(1.0, -PI / 4.0)).unwrap(), 2.0);
        // exactly on the ray arg z = α
        assert_eq!(cfg.value(C64::new(0.0, 1.0)).unwrap(), 2.0);
        assert_eq!(cfg.value(C64::new(3.0, 0.0)).unwrap(), 2.0);
        assert!(matches!(cfg.value(C64::new(0.0, 0.0)), Err(Error::Origin)));
        assert!((cfg.c0() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sector_rejects_bad_parameters() {
        assert!(SectorFieldConfig::new(0.0, -1.0).is_err());
        assert!(SectorFieldConfig::new(PI, -1.0).is_err());
        assert!(SectorFieldConfig::new(1.0, 0.0).is_err());
        assert!(SectorFieldConfig::new(1.0, 0.5).is_err());
    }

    #[test]
    fn homogeneous_examples() {
        let one = HomogeneousFieldConfig::new(0.0, FourierProfile::from_nonnegative(1.0, []).unwrap()).unwrap();
        assert!((one.value(C64::new(3.0, 4.0)).unwrap() - 1.0).abs() < 1e-15);

        let two = HomogeneousFieldConfig::new(-1.0, FourierProfile::from_nonnegative(2.0, []).unwrap()).unwrap();
        assert!((two.value(C64::new(0.0, 2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(two.value(C64::new(0.0, 0.0)), Err(Error::Origin)));

        let p = FourierProfile::from_cos_sin(1.0, &[(1, 0.1)], &[]).unwrap();
        let h = HomogeneousFieldConfig::new(-0.5, p).unwrap();
        assert!((h.value(C64::new(1.0, 0.0)).unwrap() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn profile_rejects_non_real_coefficients() {
        let bad = FourierProfile::new([(1, C64::new(1.0, 0.5)), (-1, C64::new(1.0, 0.5))]);
        assert!(bad.is_err());
        let missing = FourierProfile::new([(2, C64::new(1.0, 0.0))]);
        assert!(missing.is_err());
    }

    #[test]
    fn json_round_trip() {
        let sector = FieldConfig::Sector(quarter());
        let text = sector.to_json().unwrap();
        assert!(text.contains("\"kind\":\"sector\""));
        assert_eq!(FieldConfig::from_json(&text).unwrap(), sector);

        let doc = r#"{"kind":"homogeneous","s":-0.5,"fourier":[[-1,0.05,0.0],[0,1.0,0.0],[1,0.05,0.0]]}"#;
        let h = FieldConfig::from_json(doc).unwrap();
        assert_eq!(FieldConfig::from_json(&h.to_json().unwrap()).unwrap(), h);
        assert!((h.value(C64::new(1.0, 0.0)).unwrap() - 1.1).abs() < 1e-15);

        assert!(FieldConfig::from_json(r#"{"kind":"sector","alpha":4.0,"b1":-1}"#).is_err());
    }

    proptest! {
        #[test]
        fn sector_field_takes_two_values(x in -50.0f64..50.0, y in -50.0f64..50.0) {
            prop_assume!(x != 0.0 || y != 0.0);
            let cfg = SectorFieldConfig::new(1.3, -0.4).unwrap();
            let v = cfg.value(C64::new(x, y)).unwrap();
            prop_assert!(v == -0.8 || v == 2.0);
        }

        #[test]
        fn homogeneous_field_is_positively_homogeneous(
            x in -10.0f64..10.0, y in -10.0f64..10.0, c in 0.01f64..100.0, s in -1.9f64..0.0,
        ) {
            prop_assume!(x.hypot(y) > 1e-3);
            let p = FourierProfile::from_cos_sin(0.7, &[(1, 0.2), (3, -0.1)], &[(2, 0.3)]).unwrap();
            let h = HomogeneousFieldConfig::new(s, p).unwrap();
            let z = C64::new(x, y);
            let lhs = h.value(z * c).unwrap();
            let rhs = c.powf(s) * h.value(z).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }
    }
}
