//! Run configuration files: a line-based `key = value` format under
//! `[field]`, `[scheme]`, `[protocol]`, and `[sim]` section headers, with
//! `#` comments. Unknown sections and keys are rejected, every key has a
//! documented default, and any value can be overridden through the
//! environment (`GAFCELL_<SECTION>_<KEY>`, e.g. `GAFCELL_SIM_SEED=7`).
//!
//! Length keys (field extents, origins, cell and subcell sizes) are in
//! units of the communication range unless `[sim] absolute_units = true`.
//! Times and energies are always absolute.

use crate::bounds::Protocol;
use crate::geometry::{Dimension, ShapeKind};
use crate::partition::{Field, PartitionScheme};
use crate::point::Point;
use crate::protocol::ProtocolParams;
use crate::sim::{SimConfig, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate key '{key}' in section [{section}]")]
    DuplicateKey { line: usize, section: String, key: String },
    #[error("line {line}: bad value '{value}' for '{key}' (expected {expected})")]
    InvalidValue { line: usize, key: String, value: String, expected: &'static str },
    #[error("environment variable {var}: {message}")]
    Env { var: String, message: String },
    #[error("missing key '{key}' in section [{section}]: {why}")]
    MissingKey { section: &'static str, key: &'static str, why: &'static str },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Documentation record for one config key; the CLI help is generated from
/// these, so the table and the parser cannot drift apart.
#[derive(Debug, Clone, Copy)]
pub struct KeyDoc {
    pub section: &'static str,
    pub key: &'static str,
    pub units: &'static str,
    pub default: &'static str,
    pub description: &'static str,
}

pub const KEY_DOCS: &[KeyDoc] = &[
    KeyDoc { section: "field", key: "dimension", units: "2 or 3", default: "2", description: "planar or volumetric field" },
    KeyDoc { section: "field", key: "width", units: "length", default: "4", description: "field extent along x" },
    KeyDoc { section: "field", key: "height", units: "length", default: "4", description: "field extent along y" },
    KeyDoc { section: "field", key: "depth", units: "length", default: "4", description: "field extent along z (3D only)" },
    KeyDoc { section: "field", key: "origin_x", units: "length", default: "0", description: "field origin along x" },
    KeyDoc { section: "field", key: "origin_y", units: "length", default: "0", description: "field origin along y" },
    KeyDoc { section: "field", key: "origin_z", units: "length", default: "0", description: "field origin along z (3D only)" },
    KeyDoc { section: "scheme", key: "protocol", units: "gaf | hgaf | ehgaf", default: "gaf", description: "duty-cycling protocol variant" },
    KeyDoc { section: "scheme", key: "shape", units: "square | triangle | hexagon | cube", default: "square", description: "cell shape (must tessellate)" },
    KeyDoc { section: "scheme", key: "cell_size", units: "length", default: "0.4", description: "cell size parameter (side, height, or edge)" },
    KeyDoc { section: "scheme", key: "subcell_size", units: "length", default: "none", description: "subcell size; required for hgaf/ehgaf, forbidden for gaf" },
    KeyDoc { section: "scheme", key: "rotation_epoch", units: "time", default: "5", description: "time between schedule advances (hgaf/ehgaf)" },
    KeyDoc { section: "scheme", key: "strict", units: "true | false", default: "false", description: "reject cell sizes beyond the protocol maximum" },
    KeyDoc { section: "protocol", key: "discovery_duration", units: "time", default: "1", description: "listening window before a node may turn active" },
    KeyDoc { section: "protocol", key: "active_duration", units: "time", default: "60", description: "active tenure before re-election" },
    KeyDoc { section: "protocol", key: "sleep_duration", units: "time", default: "30", description: "sleep window before waking to discovery" },
    KeyDoc { section: "protocol", key: "draw_active", units: "energy/time", default: "1", description: "battery draw while active" },
    KeyDoc { section: "protocol", key: "draw_discovery", units: "energy/time", default: "1", description: "battery draw while listening" },
    KeyDoc { section: "protocol", key: "draw_sleep", units: "energy/time", default: "0.01", description: "battery draw while sleeping" },
    KeyDoc { section: "protocol", key: "initial_battery", units: "energy", default: "1000", description: "starting battery per node" },
    KeyDoc { section: "sim", key: "comm_range", units: "absolute length", default: "1", description: "radio range; the unit for relative lengths" },
    KeyDoc { section: "sim", key: "node_count", units: "count", default: "100", description: "number of deployed nodes" },
    KeyDoc { section: "sim", key: "seed", units: "integer", default: "0", description: "deployment RNG seed" },
    KeyDoc { section: "sim", key: "time_step", units: "time", default: "shortest timer / 10", description: "fixed step length" },
    KeyDoc { section: "sim", key: "max_time", units: "time", default: "100", description: "horizon if no cell dies first" },
    KeyDoc { section: "sim", key: "audit_interval", units: "time", default: "10", description: "time between connectivity audits" },
    KeyDoc { section: "sim", key: "absolute_units", units: "true | false", default: "false", description: "lengths are absolute instead of units of comm_range" },
];

/// A parsed run configuration. Every field is optional; defaults are
/// resolved when converting to a [`SimConfig`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub dimension: Option<u32>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub depth: Option<f64>,
    pub origin_x: Option<f64>,
    pub origin_y: Option<f64>,
    pub origin_z: Option<f64>,

    pub protocol: Option<Protocol>,
    pub shape: Option<ShapeKind>,
    pub cell_size: Option<f64>,
    pub subcell_size: Option<f64>,
    pub rotation_epoch: Option<f64>,
    pub strict: Option<bool>,

    pub discovery_duration: Option<f64>,
    pub active_duration: Option<f64>,
    pub sleep_duration: Option<f64>,
    pub draw_active: Option<f64>,
    pub draw_discovery: Option<f64>,
    pub draw_sleep: Option<f64>,
    pub initial_battery: Option<f64>,

    pub comm_range: Option<f64>,
    pub node_count: Option<usize>,
    pub seed: Option<u64>,
    pub time_step: Option<f64>,
    pub max_time: Option<f64>,
    pub audit_interval: Option<f64>,
    pub absolute_units: Option<bool>,
}

const SECTIONS: &[&str] = &["field", "scheme", "protocol", "sim"];

impl RunConfig {
    /// Parse the text of a configuration file.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        let mut section: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "section header must look like [name]".into(),
                })?;
                section = Some(
                    SECTIONS
                        .iter()
                        .find(|s| **s == name)
                        .copied()
                        .ok_or_else(|| ConfigError::UnknownSection { line, name: name.into() })?,
                );
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("key '{key}' appears before any [section] header"),
            })?;
            config.set(section, key, value, line, false)?;
        }
        Ok(config)
    }

    /// Apply `GAFCELL_<SECTION>_<KEY>` overrides from an environment
    /// snapshot. Variables with the prefix but an unknown section or key
    /// are rejected; everything else is ignored.
    pub fn apply_env_overrides<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (var, value) in vars {
            let Some(rest) = var.strip_prefix("GAFCELL_") else { continue };
            let Some((section_part, key_part)) = rest.split_once('_') else {
                return Err(ConfigError::Env {
                    var,
                    message: "expected GAFCELL_<SECTION>_<KEY>".into(),
                });
            };
            let section = section_part.to_ascii_lowercase();
            let key = key_part.to_ascii_lowercase();
            let section = SECTIONS
                .iter()
                .find(|s| **s == section)
                .copied()
                .ok_or_else(|| ConfigError::Env {
                    var: var.clone(),
                    message: format!("unknown section '{section}'"),
                })?;
            self.set(section, &key, &value, 0, true).map_err(|e| ConfigError::Env {
                var: var.clone(),
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Read overrides from the process environment.
    pub fn apply_process_env(&mut self) -> Result<(), ConfigError> {
        self.apply_env_overrides(std::env::vars())
    }

    fn set(
        &mut self,
        section: &'static str,
        key: &str,
        value: &str,
        line: usize,
        allow_override: bool,
    ) -> Result<(), ConfigError> {
        macro_rules! put {
            ($field:ident, $parsed:expr) => {{
                if self.$field.is_some() && !allow_override {
                    return Err(ConfigError::DuplicateKey {
                        line,
                        section: section.into(),
                        key: key.into(),
                    });
                }
                self.$field = Some($parsed);
            }};
        }
        let bad = |expected: &'static str| ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
            expected,
        };
        let f64v = || value.parse::<f64>().map_err(|_| bad("a number"));
        let boolv = || match value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(bad("true or false")),
        };
        match (section, key) {
            ("field", "dimension") => {
                let d = value.parse::<u32>().map_err(|_| bad("2 or 3"))?;
                if d != 2 && d != 3 {
                    return Err(bad("2 or 3"));
                }
                put!(dimension, d)
            }
            ("field", "width") => put!(width, f64v()?),
            ("field", "height") => put!(height, f64v()?),
            ("field", "depth") => put!(depth, f64v()?),
            ("field", "origin_x") => put!(origin_x, f64v()?),
            ("field", "origin_y") => put!(origin_y, f64v()?),
            ("field", "origin_z") => put!(origin_z, f64v()?),
            ("scheme", "protocol") => {
                put!(protocol, value.parse::<Protocol>().map_err(|_| bad("gaf, hgaf, or ehgaf"))?)
            }
            ("scheme", "shape") => put!(
                shape,
                value.parse::<ShapeKind>().map_err(|_| bad("square, triangle, hexagon, or cube"))?
            ),
            ("scheme", "cell_size") => put!(cell_size, f64v()?),
            ("scheme", "subcell_size") => put!(subcell_size, f64v()?),
            ("scheme", "rotation_epoch") => put!(rotation_epoch, f64v()?),
            ("scheme", "strict") => put!(strict, boolv()?),
            ("protocol", "discovery_duration") => put!(discovery_duration, f64v()?),
            ("protocol", "active_duration") => put!(active_duration, f64v()?),
            ("protocol", "sleep_duration") => put!(sleep_duration, f64v()?),
            ("protocol", "draw_active") => put!(draw_active, f64v()?),
            ("protocol", "draw_discovery") => put!(draw_discovery, f64v()?),
            ("protocol", "draw_sleep") => put!(draw_sleep, f64v()?),
            ("protocol", "initial_battery") => put!(initial_battery, f64v()?),
            ("sim", "comm_range") => put!(comm_range, f64v()?),
            ("sim", "node_count") => {
                put!(node_count, value.parse::<usize>().map_err(|_| bad("a non-negative integer"))?)
            }
            ("sim", "seed") => {
                put!(seed, value.parse::<u64>().map_err(|_| bad("a non-negative integer"))?)
            }
            ("sim", "time_step") => put!(time_step, f64v()?),
            ("sim", "max_time") => put!(max_time, f64v()?),
            ("sim", "audit_interval") => put!(audit_interval, f64v()?),
            ("sim", "absolute_units") => put!(absolute_units, boolv()?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    section: section.into(),
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    /// Override one key (`section`, `key`) with a string value, as a
    /// command-line flag would; later overrides win.
    pub fn override_key(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
    ) -> Result<(), ConfigError> {
        let section = SECTIONS
            .iter()
            .find(|s| **s == section)
            .copied()
            .ok_or_else(|| ConfigError::UnknownSection { line: 0, name: section.into() })?;
        self.set(section, key, value, 0, true)
    }

    /// Whether the seed was given explicitly (file or environment), as
    /// opposed to falling back to the default.
    pub fn seed_is_explicit(&self) -> bool {
        self.seed.is_some()
    }

    /// Resolve defaults and units into a runnable simulation config.
    pub fn to_sim_config(&self) -> Result<SimConfig, ConfigError> {
        let comm_range = self.comm_range.unwrap_or(1.0);
        let unit = if self.absolute_units.unwrap_or(false) { 1.0 } else { comm_range };

        let dimension =
            if self.dimension.unwrap_or(2) == 2 { Dimension::Two } else { Dimension::Three };
        let volumetric = dimension == Dimension::Three;
        let origin = Point::new(
            self.origin_x.unwrap_or(0.0) * unit,
            self.origin_y.unwrap_or(0.0) * unit,
            if volumetric { self.origin_z.unwrap_or(0.0) * unit } else { 0.0 },
        );
        let extent = Point::new(
            self.width.unwrap_or(4.0) * unit,
            self.height.unwrap_or(4.0) * unit,
            if volumetric { self.depth.unwrap_or(4.0) * unit } else { 0.0 },
        );
        let field = Field::new(dimension, origin, extent).map_err(SimError::from)?;

        let protocol = self.protocol.unwrap_or(Protocol::Gaf);
        let shape = self.shape.unwrap_or(ShapeKind::Square);
        let cell_size = self.cell_size.unwrap_or(0.4) * unit;
        let (subcell_size, rotation_epoch) = if protocol == Protocol::Gaf {
            // Pass explicit values through so misconfiguration is reported
            // rather than silently dropped.
            (self.subcell_size.map(|s| s * unit), self.rotation_epoch)
        } else {
            let subcell = self.subcell_size.ok_or(ConfigError::MissingKey {
                section: "scheme",
                key: "subcell_size",
                why: "subcell protocols need a subcell size",
            })?;
            (Some(subcell * unit), Some(self.rotation_epoch.unwrap_or(5.0)))
        };
        let scheme = PartitionScheme::new(protocol, shape, cell_size, subcell_size, rotation_epoch)
            .map_err(SimError::from)?
            .with_strict(self.strict.unwrap_or(false));

        let params = ProtocolParams {
            discovery_duration: self.discovery_duration.unwrap_or(1.0),
            active_duration: self.active_duration.unwrap_or(60.0),
            sleep_duration: self.sleep_duration.unwrap_or(30.0),
            draw_active: self.draw_active.unwrap_or(1.0),
            draw_discovery: self.draw_discovery.unwrap_or(1.0),
            draw_sleep: self.draw_sleep.unwrap_or(0.01),
            initial_battery: self.initial_battery.unwrap_or(1000.0),
        };

        let config = SimConfig {
            field,
            scheme,
            params,
            comm_range,
            node_count: self.node_count.unwrap_or(100),
            seed: self.seed.unwrap_or(0),
            time_step: self.time_step.unwrap_or(params.min_duration() / 10.0),
            max_time: self.max_time.unwrap_or(100.0),
            audit_interval: self.audit_interval.unwrap_or(10.0),
        };
        config.validate()?;
        Ok(config)
    }

    /// Canonical text form: every key written explicitly with its resolved
    /// or default value. Parsing it back yields the same simulation config.
    pub fn to_text(&self) -> String {
        let volumetric = self.dimension.unwrap_or(2) == 3;
        let protocol = self.protocol.unwrap_or(Protocol::Gaf);
        let mut out = String::new();
        out.push_str("[field]\n");
        out.push_str(&format!("dimension = {}\n", self.dimension.unwrap_or(2)));
        out.push_str(&format!("width = {}\n", self.width.unwrap_or(4.0)));
        out.push_str(&format!("height = {}\n", self.height.unwrap_or(4.0)));
        if volumetric {
            out.push_str(&format!("depth = {}\n", self.depth.unwrap_or(4.0)));
        }
        out.push_str(&format!("origin_x = {}\n", self.origin_x.unwrap_or(0.0)));
        out.push_str(&format!("origin_y = {}\n", self.origin_y.unwrap_or(0.0)));
        if volumetric {
            out.push_str(&format!("origin_z = {}\n", self.origin_z.unwrap_or(0.0)));
        }
        out.push_str("\n[scheme]\n");
        out.push_str(&format!("protocol = {}\n", match protocol {
            Protocol::Gaf => "gaf",
            Protocol::Hgaf => "hgaf",
            Protocol::Ehgaf => "ehgaf",
        }));
        out.push_str(&format!("shape = {}\n", self.shape.unwrap_or(ShapeKind::Square).label()));
        out.push_str(&format!("cell_size = {}\n", self.cell_size.unwrap_or(0.4)));
        if let Some(s) = self.subcell_size {
            out.push_str(&format!("subcell_size = {s}\n"));
        }
        if let Some(e) = self.rotation_epoch {
            out.push_str(&format!("rotation_epoch = {e}\n"));
        } else if protocol != Protocol::Gaf {
            out.push_str("rotation_epoch = 5\n");
        }
        out.push_str(&format!("strict = {}\n", self.strict.unwrap_or(false)));
        out.push_str("\n[protocol]\n");
        out.push_str(&format!(
            "discovery_duration = {}\n",
            self.discovery_duration.unwrap_or(1.0)
        ));
        out.push_str(&format!("active_duration = {}\n", self.active_duration.unwrap_or(60.0)));
        out.push_str(&format!("sleep_duration = {}\n", self.sleep_duration.unwrap_or(30.0)));
        out.push_str(&format!("draw_active = {}\n", self.draw_active.unwrap_or(1.0)));
        out.push_str(&format!("draw_discovery = {}\n", self.draw_discovery.unwrap_or(1.0)));
        out.push_str(&format!("draw_sleep = {}\n", self.draw_sleep.unwrap_or(0.01)));
        out.push_str(&format!("initial_battery = {}\n", self.initial_battery.unwrap_or(1000.0)));
        out.push_str("\n[sim]\n");
        out.push_str(&format!("comm_range = {}\n", self.comm_range.unwrap_or(1.0)));
        out.push_str(&format!("node_count = {}\n", self.node_count.unwrap_or(100)));
        out.push_str(&format!("seed = {}\n", self.seed.unwrap_or(0)));
        if let Some(step) = self.time_step {
            out.push_str(&format!("time_step = {step}\n"));
        }
        out.push_str(&format!("max_time = {}\n", self.max_time.unwrap_or(100.0)));
        out.push_str(&format!("audit_interval = {}\n", self.audit_interval.unwrap_or(10.0)));
        out.push_str(&format!("absolute_units = {}\n", self.absolute_units.unwrap_or(false)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_runnable_defaults() {
        let config = RunConfig::parse("").unwrap();
        assert!(!config.seed_is_explicit());
        let sim = config.to_sim_config().unwrap();
        assert_eq!(sim.node_count, 100);
        assert_eq!(sim.seed, 0);
        assert!((sim.time_step - 0.1).abs() < 1e-12);
        assert!((sim.comm_range - 1.0).abs() < 1e-12);
        assert_eq!(sim.field.extent().x, 4.0);
        assert_eq!(sim.scheme.cell_size(), 0.4);
        assert_eq!(sim.scheme.protocol(), Protocol::Gaf);
    }

    #[test]
    fn full_file_parses_with_comments_and_whitespace() {
        let text = "
# lattice comparison: sliding variant
[field]
width = 4   # in units of comm_range
height = 4

[scheme]
protocol = ehgaf
shape = square
cell_size = 1.0
subcell_size = 0.333333333333333315
rotation_epoch = 30

[protocol]
active_duration = 5
sleep_duration = 5
draw_discovery = 0.0072
draw_sleep = 0.0072
initial_battery = 12

[sim]
node_count = 2000
seed = 11
time_step = 0.1
max_time = 20000
audit_interval = 50
";
        let config = RunConfig::parse(text).unwrap();
        assert!(config.seed_is_explicit());
        let sim = config.to_sim_config().unwrap();
        assert_eq!(sim.scheme.protocol(), Protocol::Ehgaf);
        assert_eq!(sim.scheme.subcell_divisions(), Some(3));
        assert_eq!(sim.node_count, 2000);
        assert_eq!(sim.params.active_duration, 5.0);
    }

    #[test]
    fn rejects_unknown_and_malformed_input() {
        assert!(matches!(
            RunConfig::parse("[nonsense]\n"),
            Err(ConfigError::UnknownSection { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("[sim]\nwarp_speed = 9\n"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("node_count = 5\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("[sim]\nnode_count\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("[sim]\nseed = 1\nseed = 2\n"),
            Err(ConfigError::DuplicateKey { line: 3, .. })
        ));
        assert!(matches!(
            RunConfig::parse("[field]\ndimension = 4\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            RunConfig::parse("[scheme]\nprotocol = zigbee\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            RunConfig::parse("[sim]\nabsolute_units = maybe\n"),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn lengths_scale_with_comm_range_unless_absolute() {
        let relative = RunConfig::parse("[sim]\ncomm_range = 2\n").unwrap();
        let sim = relative.to_sim_config().unwrap();
        assert_eq!(sim.field.extent().x, 8.0);
        assert_eq!(sim.scheme.cell_size(), 0.8);

        let absolute =
            RunConfig::parse("[sim]\ncomm_range = 2\nabsolute_units = true\n").unwrap();
        let sim = absolute.to_sim_config().unwrap();
        assert_eq!(sim.field.extent().x, 4.0);
        assert_eq!(sim.scheme.cell_size(), 0.4);
    }

    #[test]
    fn env_overrides_win_and_are_checked() {
        let mut config = RunConfig::parse("[sim]\nseed = 1\n").unwrap();
        config
            .apply_env_overrides(vec![
                ("GAFCELL_SIM_SEED".to_string(), "9".to_string()),
                ("GAFCELL_SCHEME_CELL_SIZE".to_string(), "0.5".to_string()),
                ("PATH".to_string(), "/usr/bin".to_string()),
            ])
            .unwrap();
        assert_eq!(config.seed, Some(9));
        assert_eq!(config.cell_size, Some(0.5));

        let mut config = RunConfig::default();
        let err = config
            .apply_env_overrides(vec![("GAFCELL_SIM_BOGUS".to_string(), "1".to_string())])
            .unwrap_err();
        assert!(matches!(err, ConfigError::Env { .. }));
        let err = config
            .apply_env_overrides(vec![("GAFCELL_SIM_SEED".to_string(), "-3".to_string())])
            .unwrap_err();
        assert!(matches!(err, ConfigError::Env { .. }));
    }

    #[test]
    fn subcell_protocols_require_subcell_size() {
        let config = RunConfig::parse("[scheme]\nprotocol = hgaf\ncell_size = 0.6\n").unwrap();
        assert!(matches!(
            config.to_sim_config(),
            Err(ConfigError::MissingKey { key: "subcell_size", .. })
        ));
        let config = RunConfig::parse(
            "[scheme]\nprotocol = hgaf\ncell_size = 0.6\nsubcell_size = 0.3\n",
        )
        .unwrap();
        let sim = config.to_sim_config().unwrap();
        assert_eq!(sim.scheme.rotation_epoch(), Some(5.0));
        // A gaf scheme with leftover subcell keys is reported, not ignored.
        let config =
            RunConfig::parse("[scheme]\nprotocol = gaf\nsubcell_size = 0.2\n").unwrap();
        assert!(config.to_sim_config().is_err());
    }

    #[test]
    fn every_documented_key_is_settable_and_vice_versa() {
        for doc in KEY_DOCS {
            let mut config = RunConfig::default();
            let value = match (doc.section, doc.key) {
                ("field", "dimension") => "3",
                ("scheme", "protocol") => "hgaf",
                ("scheme", "shape") => "hexagon",
                ("scheme", "strict") | ("sim", "absolute_units") => "true",
                ("sim", "node_count") | ("sim", "seed") => "7",
                _ => "1.5",
            };
            let section = SECTIONS.iter().find(|s| **s == doc.section).unwrap();
            config
                .set(section, doc.key, value, 1, false)
                .unwrap_or_else(|e| panic!("documented key {} not settable: {e}", doc.key));
        }
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "
[scheme]
protocol = ehgaf
cell_size = 1
subcell_size = 0.2
rotation_epoch = 30

[protocol]
active_duration = 5
sleep_duration = 5
initial_battery = 12

[sim]
node_count = 500
seed = 3
max_time = 50
";
        let config = RunConfig::parse(text).unwrap();
        let reparsed = RunConfig::parse(&config.to_text()).unwrap();
        assert_eq!(
            reparsed.to_sim_config().unwrap(),
            config.to_sim_config().unwrap()
        );
        assert!(reparsed.seed_is_explicit());

        // Defaults round-trip too.
        let config = RunConfig::parse("").unwrap();
        let reparsed = RunConfig::parse(&config.to_text()).unwrap();
        assert_eq!(
            reparsed.to_sim_config().unwrap(),
            config.to_sim_config().unwrap()
        );
    }
}
