//! Closed-form microstrip and rectangular-patch models.
//!
//! These are the ground truth every surrogate is trained and scored against.
//! The microstrip impedance uses the wide-strip (w/h >= 1) expressions; the
//! patch resonant frequency is driven either by the physical patch length plus
//! the fringing-field extension, or by a calibrated effective length.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Speed of light used by the patch model, m/s.
///
/// Rounded to exactly 3e8; the calibrated 9.5 mm effective length only comes
/// out round under this value.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Fixed model parameter names accepted by [`LineKind::evaluate`].
pub const PARAM_EFFECTIVE_LENGTH: &str = "effective_length_m";
pub const PARAM_SUBSTRATE_HEIGHT: &str = "substrate_height_m";
pub const PARAM_PATCH_LENGTH: &str = "patch_length_m";

/// Named scalar parameters held constant over a sweep.
pub type FixedParams = BTreeMap<String, f64>;

/// Quasi-static effective permittivity of a strip of relative width `w_over_h`
/// on a substrate with relative dielectric constant `eps_r`.
pub fn effective_permittivity(eps_r: f64, w_over_h: f64) -> Result<f64> {
    if eps_r < 1.0 || !eps_r.is_finite() {
        return Err(Error::Domain(format!("eps_r = {eps_r} must be >= 1")));
    }
    if w_over_h <= 0.0 || !w_over_h.is_finite() {
        return Err(Error::Domain(format!("w/h = {w_over_h} must be > 0")));
    }
    let fill = (1.0 + 12.0 / w_over_h).sqrt().recip();
    Ok((eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 * fill)
}

/// A microstrip design point in the wide-strip regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrostripGeometry {
    eps_r: f64,
    w_over_h: f64,
}

impl MicrostripGeometry {
    /// The impedance expression is only valid for wide strips, so `w_over_h`
    /// below 1 is rejected rather than extrapolated.
    pub fn new(eps_r: f64, w_over_h: f64) -> Result<Self> {
        if eps_r < 1.0 || !eps_r.is_finite() {
            return Err(Error::Domain(format!("eps_r = {eps_r} must be >= 1")));
        }
        if w_over_h < 1.0 || !w_over_h.is_finite() {
            return Err(Error::Domain(format!(
                "w/h = {w_over_h} is outside the wide-strip regime (w/h >= 1)"
            )));
        }
        Ok(Self { eps_r, w_over_h })
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    pub fn w_over_h(&self) -> f64 {
        self.w_over_h
    }
}

/// Characteristic impedance in ohms.
pub fn microstrip_impedance(geom: &MicrostripGeometry) -> f64 {
    let u = geom.w_over_h;
    // Validated geometry cannot violate the permittivity preconditions.
    let eps_eff = effective_permittivity(geom.eps_r, u).expect("validated geometry");
    let width_term = u + 1.393 + (2.0 / 3.0) * (u + 1.444).ln();
    120.0 * PI / (eps_eff.sqrt() * width_term)
}

/// Which form of the fringing-length correction to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthExtension {
    /// Includes the `(w/h + 0.8)` divisor.
    #[default]
    Standard,
    /// The typeset form without the `(w/h + 0.8)` divisor.
    Printed,
}

/// Fringing-field length extension `ΔL` at each end of a patch, in meters.
pub fn patch_length_extension(
    eps_eff: f64,
    w_over_h: f64,
    substrate_height_m: f64,
    variant: LengthExtension,
) -> Result<f64> {
    if eps_eff.is_nan() || eps_eff <= 0.258 {
        return Err(Error::Singularity { eps_eff });
    }
    if w_over_h <= 0.0 || !w_over_h.is_finite() {
        return Err(Error::Domain(format!("w/h = {w_over_h} must be > 0")));
    }
    if substrate_height_m <= 0.0 || !substrate_height_m.is_finite() {
        return Err(Error::Domain(format!(
            "substrate height {substrate_height_m} m must be > 0"
        )));
    }
    let printed =
        0.412 * substrate_height_m * (eps_eff + 0.3) * (w_over_h + 0.264) / (eps_eff - 0.258);
    Ok(match variant {
        LengthExtension::Printed => printed,
        LengthExtension::Standard => printed / (w_over_h + 0.8),
    })
}

/// How the resonant length of a patch is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatchLength {
    /// Physical length `L` and substrate height `h`; resonant length is `L + 2ΔL`.
    Physical {
        substrate_height_m: f64,
        patch_length_m: f64,
    },
    /// Calibrated `L + 2ΔL` supplied directly.
    Effective { effective_length_m: f64 },
}

/// A rectangular patch design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    eps_r: f64,
    w_over_h: f64,
    length: PatchLength,
}

fn positive_length(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} = {value} m must be > 0")))
    }
}

impl PatchGeometry {
    pub fn new(eps_r: f64, w_over_h: f64, length: PatchLength) -> Result<Self> {
        if eps_r < 1.0 || !eps_r.is_finite() {
            return Err(Error::Domain(format!("eps_r = {eps_r} must be >= 1")));
        }
        if w_over_h <= 0.0 || !w_over_h.is_finite() {
            return Err(Error::Domain(format!("w/h = {w_over_h} must be > 0")));
        }
        match length {
            PatchLength::Physical {
                substrate_height_m,
                patch_length_m,
            } => {
                positive_length(PARAM_SUBSTRATE_HEIGHT, substrate_height_m)?;
                positive_length(PARAM_PATCH_LENGTH, patch_length_m)?;
            }
            PatchLength::Effective { effective_length_m } => {
                positive_length(PARAM_EFFECTIVE_LENGTH, effective_length_m)?;
            }
        }
        Ok(Self {
            eps_r,
            w_over_h,
            length,
        })
    }

    /// Builds a geometry from optional length fields. Exactly one of
    /// `effective_length_m` or the (`substrate_height_m`, `patch_length_m`)
    /// pair must be given.
    pub fn from_parts(
        eps_r: f64,
        w_over_h: f64,
        substrate_height_m: Option<f64>,
        patch_length_m: Option<f64>,
        effective_length_m: Option<f64>,
    ) -> Result<Self> {
        let length = match (substrate_height_m, patch_length_m, effective_length_m) {
            (None, None, Some(effective_length_m)) => PatchLength::Effective { effective_length_m },
            (Some(substrate_height_m), Some(patch_length_m), None) => PatchLength::Physical {
                substrate_height_m,
                patch_length_m,
            },
            (None, None, None) => return Err(Error::Config(
                "patch needs either an effective length or a physical length and substrate height"
                    .into(),
            )),
            (_, _, Some(_)) => {
                return Err(Error::Config(
                    "effective length cannot be combined with physical length or substrate height"
                        .into(),
                ))
            }
            _ => {
                return Err(Error::Config(
                    "physical patch length and substrate height must be given together".into(),
                ))
            }
        };
        Self::new(eps_r, w_over_h, length)
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    pub fn w_over_h(&self) -> f64 {
        self.w_over_h
    }

    pub fn length(&self) -> PatchLength {
        self.length
    }
}

/// Resonant frequency of the dominant patch mode, in hertz.
pub fn patch_resonant_frequency(geom: &PatchGeometry, variant: LengthExtension) -> Result<f64> {
    let eps_eff = effective_permittivity(geom.eps_r, geom.w_over_h)?;
    let resonant_length = match geom.length {
        PatchLength::Effective { effective_length_m } => effective_length_m,
        PatchLength::Physical {
            substrate_height_m,
            patch_length_m,
        } => {
            let delta =
                patch_length_extension(eps_eff, geom.w_over_h, substrate_height_m, variant)?;
            patch_length_m + 2.0 * delta
        }
    };
    Ok(SPEED_OF_LIGHT / (2.0 * eps_eff.sqrt() * resonant_length))
}

/// Physical unit of a modeled quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Ohm,
    Hertz,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Ohm => "ohm",
            Unit::Hertz => "hertz",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ohm" => Ok(Unit::Ohm),
            "hertz" => Ok(Unit::Hertz),
            other => Err(Error::Config(format!("unknown unit `{other}`"))),
        }
    }
}

/// The registered line models. Every sweep, fit and evaluation goes through
/// this one interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineKind {
    MicrostripImpedance,
    PatchFrequency,
}

impl LineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LineKind::MicrostripImpedance => "microstrip_impedance",
            LineKind::PatchFrequency => "patch_frequency",
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            LineKind::MicrostripImpedance => Unit::Ohm,
            LineKind::PatchFrequency => Unit::Hertz,
        }
    }

    /// Smallest admissible w/h, and whether it is inclusive.
    pub fn min_w_over_h(self) -> (f64, bool) {
        match self {
            LineKind::MicrostripImpedance => (1.0, true),
            LineKind::PatchFrequency => (0.0, false),
        }
    }

    /// Evaluates the model with the default (standard) length extension.
    pub fn evaluate(self, eps_r: f64, w_over_h: f64, params: &FixedParams) -> Result<f64> {
        self.evaluate_with(eps_r, w_over_h, params, LengthExtension::Standard)
    }

    pub fn evaluate_with(
        self,
        eps_r: f64,
        w_over_h: f64,
        params: &FixedParams,
        variant: LengthExtension,
    ) -> Result<f64> {
        match self {
            LineKind::MicrostripImpedance => {
                if let Some(name) = params.keys().next() {
                    return Err(Error::Config(format!(
                        "microstrip impedance takes no fixed parameters, got `{name}`"
                    )));
                }
                Ok(microstrip_impedance(&MicrostripGeometry::new(
                    eps_r, w_over_h,
                )?))
            }
            LineKind::PatchFrequency => {
                if let Some(name) = params.keys().find(|k| {
                    ![
                        PARAM_EFFECTIVE_LENGTH,
                        PARAM_SUBSTRATE_HEIGHT,
                        PARAM_PATCH_LENGTH,
                    ]
                    .contains(&k.as_str())
                }) {
                    return Err(Error::Config(format!("unknown patch parameter `{name}`")));
                }
                let geom = PatchGeometry::from_parts(
                    eps_r,
                    w_over_h,
                    params.get(PARAM_SUBSTRATE_HEIGHT).copied(),
                    params.get(PARAM_PATCH_LENGTH).copied(),
                    params.get(PARAM_EFFECTIVE_LENGTH).copied(),
                )?;
                patch_resonant_frequency(&geom, variant)
            }
        }
    }
}

impl fmt::Display for LineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "microstrip_impedance" | "microstrip" => Ok(LineKind::MicrostripImpedance),
            "patch_frequency" | "patch" => Ok(LineKind::PatchFrequency),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Looks up a registered line model by name.
pub fn line_model(name: &str) -> Result<LineKind> {
    name.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leff(mm: f64) -> FixedParams {
        FixedParams::from([(PARAM_EFFECTIVE_LENGTH.to_string(), mm * 1e-3)])
    }

    #[test]
    fn permittivity_reference_points() {
        assert_eq!(effective_permittivity(1.0, 3.7).unwrap(), 1.0);
        // 1.5 + 0.5/sqrt(13) and 3.5 + 2.5/sqrt(7), 40-digit evaluation
        let a = effective_permittivity(2.0, 1.0).unwrap();
        assert!((a - 1.638_675_049_056_307_3).abs() < 1e-15, "{a}");
        let b = effective_permittivity(6.0, 2.0).unwrap();
        assert!((b - 4.444_911_182_523_068).abs() < 1e-14, "{b}");
    }

    #[test]
    fn permittivity_domain() {
        assert!(matches!(
            effective_permittivity(0.9, 2.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            effective_permittivity(2.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            effective_permittivity(2.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            effective_permittivity(f64::NAN, 2.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn impedance_table_points() {
        for (u, z) in [(1.0, 98.525), (2.0, 68.774), (8.5, 24.445)] {
            let got = microstrip_impedance(&MicrostripGeometry::new(2.0, u).unwrap());
            assert!((got - z).abs() < 0.02, "w/h {u}: {got} vs {z}");
        }
    }

    #[test]
    fn narrow_strip_rejected() {
        assert!(MicrostripGeometry::new(2.0, 0.99).is_err());
        assert!(MicrostripGeometry::new(0.5, 2.0).is_err());
        assert!(MicrostripGeometry::new(2.0, 1.0).is_ok());
    }

    #[test]
    fn length_extension_reference() {
        // 0.412e-3 * (4.744911 * 2.264) / (4.186911 * 2.8), evaluated at 40 digits
        let got = patch_length_extension(4.444911, 2.0, 0.001, LengthExtension::Standard).unwrap();
        assert!((got - 3.775_286_792_277_853e-4).abs() < 1e-18, "{got}");
    }

    #[test]
    fn length_extension_variants_differ_by_divisor() {
        let s = patch_length_extension(3.1, 4.2, 0.0016, LengthExtension::Standard).unwrap();
        let p = patch_length_extension(3.1, 4.2, 0.0016, LengthExtension::Printed).unwrap();
        assert!((p / s - 5.0).abs() < 1e-14);
    }

    #[test]
    fn length_extension_pole() {
        assert!(matches!(
            patch_length_extension(0.258, 2.0, 0.001, LengthExtension::Standard),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(
            patch_length_extension(2.0, 2.0, 0.0, LengthExtension::Standard),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn patch_frequency_table_points() {
        for (u, mhz) in [(1.0, 7710.557), (2.0, 7489.211)] {
            let geom = PatchGeometry::from_parts(6.0, u, None, None, Some(0.0095)).unwrap();
            let f = patch_resonant_frequency(&geom, LengthExtension::Standard).unwrap();
            assert!((f / 1e6 - mhz).abs() < 0.1, "{f}");
        }
    }

    #[test]
    fn halving_length_doubles_frequency() {
        let long = PatchGeometry::from_parts(4.4, 3.0, None, None, Some(0.02)).unwrap();
        let short = PatchGeometry::from_parts(4.4, 3.0, None, None, Some(0.01)).unwrap();
        let f1 = patch_resonant_frequency(&long, LengthExtension::Standard).unwrap();
        let f2 = patch_resonant_frequency(&short, LengthExtension::Standard).unwrap();
        assert_eq!(f2, 2.0 * f1);
    }

    #[test]
    fn physical_length_uses_extension() {
        let geom = PatchGeometry::from_parts(6.0, 2.0, Some(0.001), Some(0.008), None).unwrap();
        let eps = effective_permittivity(6.0, 2.0).unwrap();
        let dl = patch_length_extension(eps, 2.0, 0.001, LengthExtension::Standard).unwrap();
        let expected = SPEED_OF_LIGHT / (2.0 * eps.sqrt() * (0.008 + 2.0 * dl));
        let got = patch_resonant_frequency(&geom, LengthExtension::Standard).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn patch_length_configuration_errors() {
        assert!(matches!(
            PatchGeometry::from_parts(6.0, 2.0, None, None, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PatchGeometry::from_parts(6.0, 2.0, Some(0.001), Some(0.01), Some(0.0095)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PatchGeometry::from_parts(6.0, 2.0, Some(0.001), None, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PatchGeometry::from_parts(6.0, 2.0, None, None, Some(-1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn line_model_dispatch() {
        let z = line_model("microstrip_impedance")
            .unwrap()
            .evaluate(2.0, 1.0, &FixedParams::new())
            .unwrap();
        assert!((z - 98.525).abs() < 0.02);
        let f = line_model("patch_frequency")
            .unwrap()
            .evaluate(6.0, 1.0, &leff(9.5))
            .unwrap();
        assert!((f / 1e6 - 7710.557).abs() < 0.1);
        assert!(matches!(line_model("slotline"), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn line_model_rejects_stray_params() {
        assert!(LineKind::MicrostripImpedance
            .evaluate(2.0, 1.0, &leff(9.5))
            .is_err());
        let mut p = leff(9.5);
        p.insert("width_m".into(), 0.01);
        assert!(LineKind::PatchFrequency.evaluate(6.0, 1.0, &p).is_err());
    }
}
