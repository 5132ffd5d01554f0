//! Human-readable run configuration: a TOML file with `[system]`,
//! `[device]` and `[crossbar]` sections. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::channel::ChannelKind;
use crate::crossbar::{ProgramConfig, WriteScheme};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::link::{ProcessorMode, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessorKind {
    Ideal,
    Crossbar,
}

fn default_mer_cap() -> f64 {
    200.0
}

fn default_capture() -> usize {
    2048
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_c: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub modulation_order: u32,
    pub cp_len: usize,
    pub channel_taps: usize,
    pub channel_kind: ChannelKind,
    pub snr_db: f64,
    pub processor_mode: ProcessorKind,
    pub channel_update_period: usize,
    pub seed: u64,
    #[serde(default = "default_mer_cap")]
    pub mer_cap_db: f64,
    #[serde(default = "default_capture")]
    pub constellation_capture: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSection,
    pub device: DeviceParams,
    #[serde(default)]
    pub crossbar: ProgramConfig,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        self.crossbar.validate()?;
        self.system_config().validate()
    }

    /// Runtime link configuration assembled from the sections.
    pub fn system_config(&self) -> SystemConfig {
        let s = &self.system;
        SystemConfig {
            n_c: s.n_c,
            n_t: s.n_t,
            n_r: s.n_r,
            modulation_order: s.modulation_order,
            cp_len: s.cp_len,
            channel_taps: s.channel_taps,
            channel_kind: s.channel_kind,
            snr_db: s.snr_db,
            processor_mode: match s.processor_mode {
                ProcessorKind::Ideal => ProcessorMode::Ideal,
                ProcessorKind::Crossbar => ProcessorMode::Crossbar(self.crossbar),
            },
            channel_update_period: s.channel_update_period,
            seed: s.seed,
            mer_cap_db: s.mer_cap_db,
            constellation_capture: s.constellation_capture,
        }
    }

    /// Built-in presets: `ofdm-demo` (4-sub-carrier single-antenna prototype
    /// over a wired channel, demo-calibrated device), `mimo-demo` (2x2
    /// narrowband demo, same device calibration) and `sweep-4x4` (the
    /// large-scale 1024-sub-carrier 4x4 system with a strongly stochastic
    /// device).
    pub fn preset(name: &str) -> Option<ConfigFile> {
        let demo_device = DeviceParams {
            sigma_c2c: 0.02,
            sigma_prog: 0.0,
            sigma_read: 0.006,
            ..DeviceParams::default()
        };
        match name {
            "ofdm-demo" => Some(ConfigFile {
                system: SystemSection {
                    n_c: 4,
                    n_t: 1,
                    n_r: 1,
                    modulation_order: 16,
                    cp_len: 1,
                    channel_taps: 1,
                    channel_kind: ChannelKind::Awgn,
                    snr_db: 30.0,
                    processor_mode: ProcessorKind::Crossbar,
                    channel_update_period: 64,
                    seed: 20,
                    mer_cap_db: default_mer_cap(),
                    constellation_capture: default_capture(),
                },
                device: demo_device.clone(),
                crossbar: ProgramConfig {
                    scheme: WriteScheme::Verify,
                    tolerance: 0.005,
                    tolerance_floor: 0.5,
                    max_pulses: 0,
                },
            }),
            "mimo-demo" => Some(ConfigFile {
                system: SystemSection {
                    n_c: 4,
                    n_t: 2,
                    n_r: 2,
                    modulation_order: 16,
                    cp_len: 1,
                    channel_taps: 1,
                    channel_kind: ChannelKind::Rayleigh,
                    snr_db: 30.0,
                    processor_mode: ProcessorKind::Crossbar,
                    channel_update_period: 64,
                    seed: 30,
                    mer_cap_db: default_mer_cap(),
                    constellation_capture: default_capture(),
                },
                device: demo_device,
                crossbar: ProgramConfig {
                    scheme: WriteScheme::Verify,
                    tolerance: 0.005,
                    tolerance_floor: 0.5,
                    max_pulses: 0,
                },
            }),
            "sweep-4x4" => Some(ConfigFile {
                system: SystemSection {
                    n_c: 1024,
                    n_t: 4,
                    n_r: 4,
                    modulation_order: 16,
                    cp_len: 72,
                    channel_taps: 4,
                    channel_kind: ChannelKind::Rayleigh,
                    snr_db: 30.0,
                    processor_mode: ProcessorKind::Crossbar,
                    channel_update_period: 14,
                    seed: 77,
                    mer_cap_db: default_mer_cap(),
                    constellation_capture: default_capture(),
                },
                device: DeviceParams {
                    sigma_c2c: 1.0,
                    sigma_prog: 0.0,
                    sigma_read: 0.005,
                    ..DeviceParams::default()
                },
                crossbar: ProgramConfig {
                    scheme: WriteScheme::Verify,
                    tolerance: 0.01,
                    tolerance_floor: 0.5,
                    max_pulses: 0,
                },
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_roundtrip_through_toml() {
        for name in ["ofdm-demo", "mimo-demo", "sweep-4x4"] {
            let preset = ConfigFile::preset(name).unwrap();
            preset.validate().unwrap();
            let parsed = ConfigFile::from_toml_str(&preset.to_toml()).unwrap();
            assert_eq!(parsed, preset, "{name}");
        }
        assert!(ConfigFile::preset("nope").is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = ConfigFile::preset("ofdm-demo").unwrap().to_toml();
        text.push_str("\n[system2]\nx = 1\n");
        assert!(ConfigFile::from_toml_str(&text).is_err());
        let sneaky = ConfigFile::preset("ofdm-demo")
            .unwrap()
            .to_toml()
            .replace("[device]", "typo_key = 3\n[device]");
        assert!(ConfigFile::from_toml_str(&sneaky).is_err());
    }

    #[test]
    fn shipped_config_files_match_presets() {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
        for name in ["ofdm-demo", "mimo-demo", "sweep-4x4"] {
            let path = format!("{root}/{name}.toml");
            let on_disk = ConfigFile::load(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
            assert_eq!(on_disk, ConfigFile::preset(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn invalid_system_section_fails_validation() {
        let mut cfg = ConfigFile::preset("ofdm-demo").unwrap();
        cfg.system.channel_taps = 10; // cp_len 1 cannot absorb 10 taps
        assert!(cfg.validate().is_err());
    }
}
