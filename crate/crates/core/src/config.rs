//! Physical and numerical parameters, the key-value file format that carries
//! them, and the spring-steel stiffness law.
//!
//! A config file holds one `key = value [unit] [@source]` entry per line.
//! `#` starts a comment. Every key in [`KEYS`] is required and unknown keys
//! are rejected. Values are converted to SI on load; when the unit is omitted
//! the value is taken to be SI already. The optional `@source` tag records
//! where the number came from (see [`Provenance`]); untagged values are
//! attributed to the user.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spring-steel thickness lattice used by manufacturable designs (m).
pub const THICKNESS_STEP: f64 = 1e-4;

/// Parameter file shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../data/default.cfg");

/// Environment variable naming a config file to use when none is given.
pub const CONFIG_ENV: &str = "WIREFISH_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Taken from the published parameter table for the prototype.
    Published,
    /// Estimated, calibrated against the reference swing kinematics.
    Estimate,
    /// Supplied by the user.
    User,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Estimate => "estimate",
            Provenance::User => "user",
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "published" => Ok(Provenance::Published),
            "estimate" => Ok(Provenance::Estimate),
            "user" => Ok(Provenance::User),
            other => Err(format!(
                "unknown source tag `@{other}` (expected @published, @estimate or @user)"
            )),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rectangular spring-steel strip acting as a cantilever.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringSpec {
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub modulus: f64,
}

impl SpringSpec {
    pub fn new(length: f64, width: f64, thickness: f64, modulus: f64) -> Result<Self> {
        let spec = SpringSpec {
            length,
            width,
            thickness,
            modulus,
        };
        spec.validate("spring")?;
        Ok(spec)
    }

    fn validate(&self, name: &str) -> Result<()> {
        for (field, v) in [
            ("length", self.length),
            ("width", self.width),
            ("thickness", self.thickness),
            ("modulus", self.modulus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name}.{field} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Second moment of area of the cross-section about the bending axis (m^4).
    pub fn area_moment(&self) -> f64 {
        self.width * self.thickness.powi(3) / 12.0
    }

    /// Rotational stiffness `E I / l` (N*m per rad).
    pub fn stiffness(&self) -> f64 {
        self.modulus * self.area_moment() / self.length
    }

    pub fn with_thickness(&self, thickness: f64) -> Self {
        SpringSpec { thickness, ..*self }
    }

    /// Thickness rounded to the nearest lattice point, never below one step.
    pub fn snapped_to_grid(&self) -> Self {
        let steps = (self.thickness / THICKNESS_STEP).round().max(1.0);
        self.with_thickness(steps * THICKNESS_STEP)
    }

    pub fn is_on_grid(&self) -> bool {
        let steps = self.thickness / THICKNESS_STEP;
        (steps - steps.round()).abs() < 1e-6
    }

    /// Thickness that yields the requested stiffness with the other
    /// dimensions unchanged.
    pub fn thickness_for_stiffness(&self, stiffness: f64) -> f64 {
        (12.0 * stiffness * self.length / (self.modulus * self.width)).cbrt()
    }
}

/// Rotational stiffness of a spring-steel strip, optionally evaluated at the
/// thickness lattice point nearest to the nominal thickness.
pub fn rotational_stiffness(spec: &SpringSpec, grid: bool) -> f64 {
    if grid {
        spec.snapped_to_grid().stiffness()
    } else {
        spec.stiffness()
    }
}

/// Eccenter / slide-way / reel geometry, the rotating inertias behind the
/// reel, and the motor limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionSpec {
    /// Eccenter bias `d1` (m).
    pub eccenter_offset: f64,
    /// Distance `d2` from the revolving shaft to the slide way (m).
    pub slide_distance: f64,
    pub reel_radius: f64,
    /// Distance between the body axis and each wire (m).
    pub wire_offset: f64,
    pub reel_inertia: f64,
    pub slide_inertia: f64,
    pub pendulum_inertia: f64,
    /// Largest torque the motor can deliver (N*m).
    pub max_torque: f64,
    /// Allowable motor power (W).
    pub power_cap: f64,
}

impl TransmissionSpec {
    /// `d1 / d2`, the sine amplitude of the reel angle.
    pub fn crank_ratio(&self) -> f64 {
        self.eccenter_offset / self.slide_distance
    }

    /// `R_D / r_w`, reel rotation to AES central angle.
    pub fn bend_gain(&self) -> f64 {
        self.reel_radius / self.wire_offset
    }

    /// Inertia of reel, slide way and pendulum bar rotating together.
    pub fn lumped_inertia(&self) -> f64 {
        self.reel_inertia + self.slide_inertia + self.pendulum_inertia
    }

    /// Largest AES central angle over a motor revolution.
    pub fn max_bend(&self) -> f64 {
        self.bend_gain() * self.crank_ratio().asin()
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("drive.eccenter_offset", self.eccenter_offset),
            ("drive.slide_distance", self.slide_distance),
            ("drive.reel_radius", self.reel_radius),
            ("drive.wire_offset", self.wire_offset),
            ("drive.reel_inertia", self.reel_inertia),
            ("drive.slide_inertia", self.slide_inertia),
            ("drive.pendulum_inertia", self.pendulum_inertia),
            ("drive.max_torque", self.max_torque),
            ("drive.power_cap", self.power_cap),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{key} must be positive, got {v}")));
            }
        }
        if self.eccenter_offset >= self.slide_distance {
            return Err(Error::InvalidConfig(format!(
                "d1 must be < d2 (drive.eccenter_offset = {}, drive.slide_distance = {})",
                self.eccenter_offset, self.slide_distance
            )));
        }
        Ok(())
    }
}

/// Mass, geometry and Morison coefficients of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub mass: f64,
    /// Distance from the link origin to its center of mass (m).
    pub com_offset: f64,
    /// Planar moment of inertia about the center of mass (kg*m^2).
    pub inertia: f64,
    /// Characteristic area seen by flow along the link axis (m^2).
    pub area_x: f64,
    /// Characteristic area seen by flow normal to the link (m^2).
    pub area_y: f64,
    pub drag_coeff: f64,
    pub friction_coeff: f64,
    pub added_mass_coeff: f64,
}

impl LinkParams {
    pub fn added_mass(&self) -> f64 {
        self.added_mass_coeff * self.mass
    }

    /// Body mass plus entrained fluid mass.
    pub fn total_mass(&self) -> f64 {
        self.mass + self.added_mass()
    }

    fn validate(&self, name: &str) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("area_x", self.area_x),
            ("area_y", self.area_y),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name}.{field} must be positive, got {v}"
                )));
            }
        }
        let non_negative = [
            ("com_offset", self.com_offset),
            ("inertia", self.inertia),
            ("drag_coeff", self.drag_coeff),
            ("friction_coeff", self.friction_coeff),
            ("added_mass_coeff", self.added_mass_coeff),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name}.{field} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Link 1 is the AES chord, link 2 the caudal fin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBodyParams {
    pub links: [LinkParams; 2],
    /// Length of the caudal fin link (m).
    pub fin_length: f64,
    pub fluid_density: f64,
}

impl TailBodyParams {
    fn validate(&self) -> Result<()> {
        self.links[0].validate("link1")?;
        self.links[1].validate("link2")?;
        if !(self.fin_length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "link2.length must be positive, got {}",
                self.fin_length
            )));
        }
        if !(self.fluid_density > 0.0 && self.fluid_density.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fluid.rho must be positive, got {}",
                self.fluid_density
            )));
        }
        if self.links[1].com_offset > self.fin_length {
            return Err(Error::InvalidConfig(format!(
                "link2.com_offset ({}) exceeds link2.length ({})",
                self.links[1].com_offset, self.fin_length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    /// Tail swing frequency, equal to the motor revolution rate (Hz).
    pub frequency: f64,
    pub steps_per_cycle: usize,
    /// Cycles always discarded before steady-state detection starts.
    pub warmup_cycles: usize,
    pub measure_cycles: usize,
    /// Cycle budget for reaching steady state.
    pub max_cycles: usize,
    /// Relative cycle-to-cycle change of the RMS fin angle that counts as settled.
    pub steady_tol: f64,
}

impl SimSettings {
    pub fn with_frequency(&self, frequency: f64) -> Self {
        SimSettings { frequency, ..*self }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.frequency * self.steps_per_cycle as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sim.frequency must be positive, got {}",
                self.frequency
            )));
        }
        if self.steps_per_cycle < 500 {
            return Err(Error::InvalidConfig(format!(
                "sim.steps_per_cycle must be at least 500, got {}",
                self.steps_per_cycle
            )));
        }
        if self.measure_cycles < 2 {
            return Err(Error::InvalidConfig(format!(
                "sim.measure_cycles must be at least 2, got {}",
                self.measure_cycles
            )));
        }
        if self.warmup_cycles < 6 {
            return Err(Error::InvalidConfig(format!(
                "sim.warmup_cycles must be at least 6, got {}",
                self.warmup_cycles
            )));
        }
        if self.max_cycles <= self.warmup_cycles {
            return Err(Error::InvalidConfig(format!(
                "sim.max_cycles ({}) must exceed sim.warmup_cycles ({})",
                self.max_cycles, self.warmup_cycles
            )));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::InvalidConfig("sim.steady_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Physical model of the fishtail: springs, drive and body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FishModel {
    pub aes: SpringSpec,
    pub pes: SpringSpec,
    pub drive: TransmissionSpec,
    pub body: TailBodyParams,
}

impl FishModel {
    /// Checks everything that involves more than one parameter group.
    pub fn validate(&self) -> Result<()> {
        self.aes.validate("aes")?;
        self.pes.validate("pes")?;
        self.drive.validate()?;
        self.body.validate()?;
        let shortest_chord = crate::transmission::chord(self.drive.max_bend(), self.aes.length).length;
        if self.body.links[0].com_offset > shortest_chord {
            return Err(Error::InvalidConfig(format!(
                "link1.com_offset ({}) exceeds the shortest AES chord ({shortest_chord:.6} m)",
                self.body.links[0].com_offset
            )));
        }
        Ok(())
    }

    pub fn pes_stiffness(&self) -> f64 {
        self.pes.stiffness()
    }

    pub fn with_pes_stiffness(&self, stiffness: f64) -> Self {
        let mut m = *self;
        m.pes.thickness = self.pes.thickness_for_stiffness(stiffness);
        m
    }

    pub fn with_pes_thickness(&self, thickness: f64) -> Self {
        let mut m = *self;
        m.pes.thickness = thickness;
        m
    }
}

/// A loaded, validated parameter set together with the source of each value.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: FishModel,
    pub sim: SimSettings,
    pub provenance: BTreeMap<String, Provenance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Area,
    Mass,
    Inertia,
    Modulus,
    Torque,
    Power,
    Density,
    Frequency,
    Ratio,
    Count,
}

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Length => &[("m", 1.0), ("cm", 1e-2), ("mm", 1e-3)],
            Dim::Area => &[("m^2", 1.0), ("cm^2", 1e-4), ("mm^2", 1e-6)],
            Dim::Mass => &[("kg", 1.0), ("g", 1e-3)],
            Dim::Inertia => &[("kg*m^2", 1.0), ("g*cm^2", 1e-7), ("kg*mm^2", 1e-6)],
            Dim::Modulus => &[("Pa", 1.0), ("kPa", 1e3), ("MPa", 1e6), ("GPa", 1e9)],
            Dim::Torque => &[("N*m", 1.0), ("mN*m", 1e-3)],
            Dim::Power => &[("W", 1.0), ("mW", 1e-3)],
            Dim::Density => &[("kg/m^3", 1.0), ("g/cm^3", 1e3)],
            Dim::Frequency => &[("Hz", 1.0)],
            Dim::Ratio => &[("-", 1.0)],
            Dim::Count => &[],
        }
    }

    fn si_unit(self) -> Option<&'static str> {
        self.units().first().map(|u| u.0)
    }
}

/// Every recognised key with its physical dimension.
pub const KEYS: &[&str] = &[
    "aes.length",
    "aes.width",
    "aes.thickness",
    "aes.modulus",
    "pes.length",
    "pes.width",
    "pes.thickness",
    "pes.modulus",
    "drive.eccenter_offset",
    "drive.slide_distance",
    "drive.reel_radius",
    "drive.wire_offset",
    "drive.reel_inertia",
    "drive.slide_inertia",
    "drive.pendulum_inertia",
    "drive.max_torque",
    "drive.power_cap",
    "link1.mass",
    "link1.com_offset",
    "link1.inertia",
    "link1.area_x",
    "link1.area_y",
    "link1.drag_coeff",
    "link1.friction_coeff",
    "link1.added_mass_coeff",
    "link2.length",
    "link2.mass",
    "link2.com_offset",
    "link2.inertia",
    "link2.area_x",
    "link2.area_y",
    "link2.drag_coeff",
    "link2.friction_coeff",
    "link2.added_mass_coeff",
    "fluid.rho",
    "sim.frequency",
    "sim.steps_per_cycle",
    "sim.warmup_cycles",
    "sim.measure_cycles",
    "sim.max_cycles",
    "sim.steady_tol",
];

fn dim_of(key: &str) -> Option<Dim> {
    if !KEYS.contains(&key) {
        return None;
    }
    let field = key.rsplit('.').next().unwrap_or(key);
    Some(match field {
        "length" | "width" | "thickness" | "eccenter_offset" | "slide_distance" | "reel_radius"
        | "wire_offset" | "com_offset" => Dim::Length,
        "modulus" => Dim::Modulus,
        "reel_inertia" | "slide_inertia" | "pendulum_inertia" | "inertia" => Dim::Inertia,
        "max_torque" => Dim::Torque,
        "power_cap" => Dim::Power,
        "mass" => Dim::Mass,
        "area_x" | "area_y" => Dim::Area,
        "drag_coeff" | "friction_coeff" | "added_mass_coeff" | "steady_tol" => Dim::Ratio,
        "rho" => Dim::Density,
        "frequency" => Dim::Frequency,
        "steps_per_cycle" | "warmup_cycles" | "measure_cycles" | "max_cycles" => Dim::Count,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    value: f64,
    line: usize,
    provenance: Provenance,
}

fn line_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::ConfigLine {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_line(line_no: usize, raw: &str) -> Result<Option<(String, Entry)>> {
    let text = raw.split('#').next().unwrap_or("").trim();
    if text.is_empty() {
        return Ok(None);
    }
    let (key, rhs) = text
        .split_once('=')
        .ok_or_else(|| line_error(line_no, text, "expected `key = value [unit]`"))?;
    let key = key.trim();
    let dim = dim_of(key).ok_or_else(|| line_error(line_no, key, "unknown key"))?;

    let mut tokens = rhs.split_whitespace();
    let value_tok = tokens
        .next()
        .ok_or_else(|| line_error(line_no, key, "missing value"))?;
    let mut unit: Option<&str> = None;
    let mut provenance = Provenance::User;
    for tok in tokens {
        if let Some(tag) = tok.strip_prefix('@') {
            provenance = tag.parse().map_err(|e: String| line_error(line_no, key, e))?;
        } else if unit.is_none() {
            unit = Some(tok.trim_start_matches('[').trim_end_matches(']'));
        } else {
            return Err(line_error(line_no, key, format!("unexpected token `{tok}`")));
        }
    }

    let mut value: f64 = value_tok
        .parse()
        .map_err(|_| line_error(line_no, key, format!("`{value_tok}` is not a number")))?;
    if !value.is_finite() {
        return Err(line_error(line_no, key, "value must be finite"));
    }
    if dim == Dim::Count {
        if unit.is_some() {
            return Err(line_error(line_no, key, "counts take no unit"));
        }
        if value.fract() != 0.0 || value < 0.0 {
            return Err(line_error(line_no, key, "expected a non-negative integer"));
        }
    } else if let Some(u) = unit {
        let factor = dim
            .units()
            .iter()
            .find(|(name, _)| *name == u)
            .map(|(_, f)| *f)
            .ok_or_else(|| {
                let allowed: Vec<_> = dim.units().iter().map(|(n, _)| *n).collect();
                line_error(
                    line_no,
                    key,
                    format!("malformed unit `{u}` (expected one of {})", allowed.join(", ")),
                )
            })?;
        value *= factor;
    }
    if value <= 0.0 && !matches!(dim, Dim::Ratio | Dim::Length) {
        return Err(line_error(line_no, key, format!("must be positive, got {value}")));
    }
    if value < 0.0 {
        return Err(line_error(line_no, key, format!("must be non-negative, got {value}")));
    }
    Ok(Some((
        key.to_string(),
        Entry {
            value,
            line: line_no,
            provenance,
        },
    )))
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The shipped default parameter set.
    pub fn shipped() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            if let Some((key, entry)) = parse_line(idx + 1, raw)? {
                if let Some(prev) = entries.get(&key) {
                    return Err(line_error(
                        entry.line,
                        &key,
                        format!("duplicate key (first set on line {})", prev.line),
                    ));
                }
                entries.insert(key, entry);
            }
        }
        for key in KEYS {
            if !entries.contains_key(*key) {
                return Err(Error::MissingKey {
                    key: (*key).to_string(),
                });
            }
        }
        let get = |k: &str| entries[k].value;
        let at = |k: &str| entries[k].line;

        let spring = |p: &str| -> Result<SpringSpec> {
            for f in ["length", "width", "thickness", "modulus"] {
                let k = format!("{p}.{f}");
                if get(&k) <= 0.0 {
                    return Err(line_error(at(&k), &k, "must be positive"));
                }
            }
            Ok(SpringSpec {
                length: get(&format!("{p}.length")),
                width: get(&format!("{p}.width")),
                thickness: get(&format!("{p}.thickness")),
                modulus: get(&format!("{p}.modulus")),
            })
        };
        let link = |p: &str| LinkParams {
            mass: get(&format!("{p}.mass")),
            com_offset: get(&format!("{p}.com_offset")),
            inertia: get(&format!("{p}.inertia")),
            area_x: get(&format!("{p}.area_x")),
            area_y: get(&format!("{p}.area_y")),
            drag_coeff: get(&format!("{p}.drag_coeff")),
            friction_coeff: get(&format!("{p}.friction_coeff")),
            added_mass_coeff: get(&format!("{p}.added_mass_coeff")),
        };

        let drive = TransmissionSpec {
            eccenter_offset: get("drive.eccenter_offset"),
            slide_distance: get("drive.slide_distance"),
            reel_radius: get("drive.reel_radius"),
            wire_offset: get("drive.wire_offset"),
            reel_inertia: get("drive.reel_inertia"),
            slide_inertia: get("drive.slide_inertia"),
            pendulum_inertia: get("drive.pendulum_inertia"),
            max_torque: get("drive.max_torque"),
            power_cap: get("drive.power_cap"),
        };
        if drive.eccenter_offset >= drive.slide_distance {
            return Err(line_error(
                at("drive.eccenter_offset"),
                "drive.eccenter_offset",
                format!(
                    "d1 must be < d2 (d1 = {}, d2 = {} on line {})",
                    drive.eccenter_offset,
                    drive.slide_distance,
                    at("drive.slide_distance")
                ),
            ));
        }

        let model = FishModel {
            aes: spring("aes")?,
            pes: spring("pes")?,
            drive,
            body: TailBodyParams {
                links: [link("link1"), link("link2")],
                fin_length: get("link2.length"),
                fluid_density: get("fluid.rho"),
            },
        };
        let sim = SimSettings {
            frequency: get("sim.frequency"),
            steps_per_cycle: get("sim.steps_per_cycle") as usize,
            warmup_cycles: get("sim.warmup_cycles") as usize,
            measure_cycles: get("sim.measure_cycles") as usize,
            max_cycles: get("sim.max_cycles") as usize,
            steady_tol: get("sim.steady_tol"),
        };
        model.validate()?;
        sim.validate()?;

        let provenance = entries
            .iter()
            .map(|(k, e)| (k.clone(), e.provenance))
            .collect();
        Ok(Config {
            model,
            sim,
            provenance,
        })
    }

    /// Value of a key in SI units.
    pub fn value(&self, key: &str) -> Option<f64> {
        let m = &self.model;
        let l = &m.body.links;
        let d = &m.drive;
        let s = &self.sim;
        Some(match key {
            "aes.length" => m.aes.length,
            "aes.width" => m.aes.width,
            "aes.thickness" => m.aes.thickness,
            "aes.modulus" => m.aes.modulus,
            "pes.length" => m.pes.length,
            "pes.width" => m.pes.width,
            "pes.thickness" => m.pes.thickness,
            "pes.modulus" => m.pes.modulus,
            "drive.eccenter_offset" => d.eccenter_offset,
            "drive.slide_distance" => d.slide_distance,
            "drive.reel_radius" => d.reel_radius,
            "drive.wire_offset" => d.wire_offset,
            "drive.reel_inertia" => d.reel_inertia,
            "drive.slide_inertia" => d.slide_inertia,
            "drive.pendulum_inertia" => d.pendulum_inertia,
            "drive.max_torque" => d.max_torque,
            "drive.power_cap" => d.power_cap,
            "link2.length" => m.body.fin_length,
            "fluid.rho" => m.body.fluid_density,
            "sim.frequency" => s.frequency,
            "sim.steps_per_cycle" => s.steps_per_cycle as f64,
            "sim.warmup_cycles" => s.warmup_cycles as f64,
            "sim.measure_cycles" => s.measure_cycles as f64,
            "sim.max_cycles" => s.max_cycles as f64,
            "sim.steady_tol" => s.steady_tol,
            other => {
                let (prefix, field) = other.split_once('.')?;
                let link = match prefix {
                    "link1" => &l[0],
                    "link2" => &l[1],
                    _ => return None,
                };
                match field {
                    "mass" => link.mass,
                    "com_offset" => link.com_offset,
                    "inertia" => link.inertia,
                    "area_x" => link.area_x,
                    "area_y" => link.area_y,
                    "drag_coeff" => link.drag_coeff,
                    "friction_coeff" => link.friction_coeff,
                    "added_mass_coeff" => link.added_mass_coeff,
                    _ => return None,
                }
            }
        })
    }

    /// Marks a key as user-supplied after a command-line override.
    pub fn mark_user(&mut self, key: &str) {
        if let Some(p) = self.provenance.get_mut(key) {
            *p = Provenance::User;
        }
    }

    /// Serialises the resolved parameters in the config-file format, SI units,
    /// with round-trip float formatting so the snapshot reloads bit-exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let v = self.value(key).expect("every listed key has a value");
            let dim = dim_of(key).expect("listed key");
            let tag = self.provenance.get(*key).copied().unwrap_or(Provenance::User);
            let value = if dim == Dim::Count {
                format!("{}", v as u64)
            } else {
                format!("{v:?}")
            };
            match dim.si_unit() {
                Some(u) => out.push_str(&format!("{key} = {value} {u} @{tag}\n")),
                None => out.push_str(&format!("{key} = {value} @{tag}\n")),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn replace_line(text: &str, key: &str, new: &str) -> String {
        text.lines()
            .map(|l| {
                if l.trim_start().starts_with(key) && l.contains('=') {
                    new.to_string()
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn shipped_aes_matches_published_table() {
        let cfg = Config::shipped();
        let aes = cfg.model.aes;
        assert_eq!(aes.length, 0.083);
        assert_eq!(aes.width, 0.028);
        assert!((aes.modulus - 1.97e11).abs() < 1.0);
        assert_eq!(cfg.provenance["aes.modulus"], Provenance::Published);
        assert_eq!(cfg.provenance["drive.reel_inertia"], Provenance::Published);
    }

    #[test]
    fn provenance_is_total() {
        let cfg = Config::shipped();
        assert_eq!(cfg.provenance.len(), KEYS.len());
        for key in KEYS {
            assert!(cfg.provenance.contains_key(*key), "{key}");
        }
    }

    #[test]
    fn eccenter_longer_than_slide_distance_is_rejected() {
        let text = replace_line(DEFAULT_CONFIG, "drive.eccenter_offset", "drive.eccenter_offset = 0.02 m");
        let text = replace_line(&text, "drive.slide_distance", "drive.slide_distance = 0.01 m");
        let err = Config::parse(&text).unwrap_err().to_string();
        assert!(err.contains("d1 must be < d2"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn missing_density_names_rho() {
        let text = replace_line(DEFAULT_CONFIG, "fluid.rho", "");
        let err = Config::parse(&text).unwrap_err();
        assert!(matches!(err, Error::MissingKey { .. }));
        assert!(err.to_string().contains("rho"));
    }

    #[test]
    fn bad_unit_reports_key_and_line() {
        let text = "aes.length = 83 furlongs\n";
        match Config::parse(text).unwrap_err() {
            Error::ConfigLine { line, key, message } => {
                assert_eq!(line, 1);
                assert_eq!(key, "aes.length");
                assert!(message.contains("malformed unit"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = format!("{DEFAULT_CONFIG}\nlink3.mass = 1 kg\n");
        let err = Config::parse(&text).unwrap_err().to_string();
        assert!(err.contains("unknown key"), "{err}");
    }

    #[test]
    fn non_positive_value_is_an_error() {
        let text = replace_line(DEFAULT_CONFIG, "link2.mass", "link2.mass = 0 kg");
        let err = Config::parse(&text).unwrap_err().to_string();
        assert!(err.contains("link2.mass") && err.contains("positive"), "{err}");
    }

    #[test]
    fn duplicate_key_is_an_error() {
        let text = format!("{DEFAULT_CONFIG}\nfluid.rho = 1000\n");
        assert!(Config::parse(&text).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn unit_conversion() {
        let text = replace_line(DEFAULT_CONFIG, "aes.thickness", "aes.thickness = 0.3 mm");
        let cfg = Config::parse(&text).unwrap();
        assert!((cfg.model.aes.thickness - 3e-4).abs() < 1e-18);
        assert_eq!(cfg.provenance["aes.thickness"], Provenance::User);
    }

    #[test]
    fn snapshot_reloads_identically() {
        let cfg = Config::shipped();
        let again = Config::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn stiffness_of_published_strips() {
        let cfg = Config::shipped();
        let pes = cfg.model.pes;
        assert!((pes.with_thickness(0.4e-3).stiffness() - 1.31).abs() < 0.01);
        assert!((pes.with_thickness(0.8e-3).stiffness() - 10.51).abs() < 0.01);
        assert!((cfg.model.aes.with_thickness(0.3e-3).stiffness() - 0.15).abs() < 0.005);
    }

    #[test]
    fn grid_snapping() {
        let s = SpringSpec::new(0.083, 0.028, 0.973e-3, 1.97e11).unwrap();
        let g = s.snapped_to_grid();
        assert!((g.thickness - 1.0e-3).abs() < 1e-15);
        assert!(g.is_on_grid());
        assert!(!s.is_on_grid());
        assert_eq!(rotational_stiffness(&s, true), g.stiffness());
    }

    #[test]
    fn thickness_inverse() {
        let s = SpringSpec::new(0.083, 0.028, 0.5e-3, 1.97e11).unwrap();
        let k = s.stiffness();
        assert!((s.thickness_for_stiffness(k) - 0.5e-3).abs() < 1e-15);
    }
}
