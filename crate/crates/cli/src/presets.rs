//! Named experiment setups, each at full size (`paper`) and at a reduced
//! size (`desk`) that finishes in minutes on one core.
//!
//! Order studies share one protocol: ladder Picard tolerance 1e-10 with up
//! to 1000 sweeps, 10 bootstrap substeps, and a third-order reference with
//! Picard tolerance 1e-13.
//!
//! The crystallite preset places its three blocks evenly along the
//! horizontal midline, at a quarter, half and three quarters of the side.

use std::fmt;
use std::str::FromStr;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            _ => Err(format!("scale must be paper or desk, got `{s}`")),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        })
    }
}

/// Whether a preset is a single run or an order study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Run,
    Converge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub action: Action,
}

pub const PRESETS: [Preset; 10] = [
    Preset {
        name: "ac-order",
        summary: "Allen-Cahn temporal order study",
        action: Action::Converge,
    },
    Preset {
        name: "ch-order",
        summary: "Cahn-Hilliard (Neumann) temporal order study",
        action: Action::Converge,
    },
    Preset {
        name: "mbe-slope-order",
        summary: "MBE with slope selection, order study",
        action: Action::Converge,
    },
    Preset {
        name: "mbe-noslope-order",
        summary: "MBE without slope selection, order study",
        action: Action::Converge,
    },
    Preset {
        name: "pfc-order",
        summary: "phase field crystal order study",
        action: Action::Converge,
    },
    Preset {
        name: "ch-coarsening",
        summary: "Cahn-Hilliard coarsening from random data, adaptive",
        action: Action::Run,
    },
    Preset {
        name: "mbe-slope-growth",
        summary: "MBE slope selection growth, adaptive",
        action: Action::Run,
    },
    Preset {
        name: "mbe-noslope-growth",
        summary: "MBE no slope selection growth, adaptive",
        action: Action::Run,
    },
    Preset {
        name: "pfc-crystallites",
        summary: "three rotated crystallites growing, adaptive",
        action: Action::Run,
    },
    Preset {
        name: "ac-theta",
        summary: "Allen-Cahn ETD2 with large steps; try --theta 0",
        action: Action::Run,
    },
];

pub fn find(name: &str) -> Option<Preset> {
    PRESETS.iter().copied().find(|p| p.name == name)
}

const ORDER_SOLVER: &str = "[solver]\npicard_tol = 1e-10\nmax_picard = 1000\n";

fn ladder(first: f64) -> String {
    let v: Vec<String> = (0..5).map(|k| format!("{:e}", first / f64::powi(2.0, k))).collect();
    format!("[{}]", v.join(", "))
}

fn order_study(model: &str, domain: &str, profile: &str, final_time: f64, first: f64, reference_dt: f64) -> String {
    format!(
        "{model}\n{domain}\n[time]\nfinal_time = {final_time:?}\norder = 3\ndt = {first:e}\nbootstrap_substeps = 10\n\n\
         {ORDER_SOLVER}\n[initial]\ntype = \"profile\"\nname = \"{profile}\"\n\n\
         [study]\nladder = {}\nreference_dt = {reference_dt:e}\nreference_order = 3\nreference_picard_tol = 1e-13\n",
        ladder(first)
    )
}

fn periodic(length: &str, nodes: usize) -> String {
    format!("[domain]\ntype = \"periodic\"\nlength = {length}\nnodes = {nodes}\n")
}

fn adaptive(final_time: f64, dt_min: f64, dt_max: f64, gamma: f64, snapshots: &[f64]) -> String {
    let snaps: Vec<String> = snapshots.iter().map(|s| format!("{s:?}")).collect();
    format!(
        "[time]\nfinal_time = {final_time:?}\norder = 3\nsnapshots = [{}]\n\n\
         [time.adaptive]\ndt_min = {dt_min:e}\ndt_max = {dt_max:e}\ngamma = {gamma:e}\n",
        snaps.join(", ")
    )
}

/// TOML text of a preset; parses and validates as a [`RunConfig`].
pub fn config_text(preset: &Preset, scale: Scale) -> String {
    let paper = scale == Scale::Paper;
    let out = format!("\n[output]\ndir = \"out/{}-{scale}\"\nseed = 2024\n", preset.name);
    let body = match preset.name {
        "ac-order" => order_study(
            "[model]\nkind = \"allen-cahn\"\nepsilon_sq = 0.01\ntheta = 10.0\n",
            &periodic("\"2pi\"", if paper { 128 } else { 64 }),
            "sin2x-cos3y",
            if paper { 1.0 } else { 0.5 },
            0.1,
            if paper { 1e-5 } else { 1e-4 },
        ),
        "ch-order" => order_study(
            "[model]\nkind = \"cahn-hilliard\"\nepsilon_sq = 2.5e-3\n",
            &format!(
                "[domain]\ntype = \"neumann\"\na = -1\nb = 1\ndegree = {}\n",
                if paper { 128 } else { 64 }
            ),
            "cos-modes",
            1.0,
            0.01,
            if paper { 1e-5 } else { 1e-4 },
        ),
        "mbe-slope-order" | "mbe-noslope-order" => order_study(
            &format!(
                "[model]\nkind = \"{}\"\nepsilon_sq = 0.01\n",
                preset.name.trim_end_matches("-order")
            ),
            &periodic("\"2pi\"", if paper { 128 } else { 64 }),
            "sin-modes",
            1.0,
            0.01,
            if paper { 1e-5 } else { 1e-4 },
        ),
        "pfc-order" => order_study(
            "[model]\nkind = \"pfc\"\nsigma = 1.0\ndelta = 0.025\n",
            &periodic("32", if paper { 256 } else { 128 }),
            "pfc-wave",
            1.0,
            0.1,
            if paper { 1e-5 } else { 1e-4 },
        ),
        "ch-coarsening" => format!(
            "[model]\nkind = \"cahn-hilliard\"\nepsilon_sq = 0.01\n\n\
             [domain]\ntype = \"neumann\"\na = 0\nb = \"2pi\"\ndegree = {}\n\n{}\n\
             [initial]\ntype = \"random\"\namplitude = 0.05\n",
            if paper { 128 } else { 48 },
            if paper {
                adaptive(200.0, 1e-4, 0.1, 1e5, &[0.1, 10.0, 20.0, 100.0, 200.0])
            } else {
                adaptive(20.0, 1e-4, 0.1, 1e5, &[0.1, 10.0, 20.0])
            },
        ),
        "mbe-slope-growth" | "mbe-noslope-growth" => format!(
            "[model]\nkind = \"{}\"\nepsilon_sq = 9e-4\n\n{}\n{}\n[initial]\ntype = \"random\"\namplitude = 0.001\n",
            preset.name.trim_end_matches("-growth"),
            periodic("\"2pi\"", if paper { 128 } else { 64 }),
            if paper {
                adaptive(500.0, 1e-5, 1e-2, 100.0, &[1.0, 50.0, 100.0, 500.0])
            } else {
                adaptive(10.0, 1e-5, 1e-2, 100.0, &[1.0, 10.0])
            },
        ),
        "pfc-crystallites" => {
            let (length, nodes) = if paper { (800.0, 1024) } else { (200.0, 256) };
            let (q, h) = (length / 4.0, length / 2.0);
            format!(
                "[model]\nkind = \"pfc\"\nsigma = 1.0\ndelta = 0.25\n\n{}\n{}\n\
                 [initial]\ntype = \"crystallites\"\ncenters = [[{q:?}, {h:?}], [{h:?}, {h:?}], [{:?}, {h:?}]]\n\
                 angles = [\"-pi/4\", 0, \"pi/4\"]\nblock = 40.0\nbackground = 0.285\n",
                periodic(&format!("{length:?}"), nodes),
                if paper {
                    adaptive(2000.0, 0.02, 1.0, 10.0, &[0.0, 100.0, 500.0, 1000.0, 2000.0])
                } else {
                    adaptive(20.0, 0.02, 1.0, 10.0, &[0.0, 10.0, 20.0])
                },
                3.0 * q,
            )
        }
        "ac-theta" => format!(
            "[model]\nkind = \"allen-cahn\"\nepsilon_sq = 0.01\ntheta = 10.0\n\n{}\n\
             [time]\nfinal_time = {}\norder = 2\ndt = 0.1\n\n[solver]\nmax_picard = 100\npicard_tol = 1e-10\n\n\
             [initial]\ntype = \"profile\"\nname = \"sin2x-cos3y\"\n",
            periodic("\"2pi\"", if paper { 128 } else { 64 }),
            if paper { 5.0 } else { 0.5 },
        ),
        other => unreachable!("preset `{other}` has no configuration"),
    };
    body + &out
}

pub fn config(preset: &Preset, scale: Scale) -> RunConfig {
    RunConfig::from_toml(&config_text(preset, scale)).expect("presets are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tdsr_core::ModelKind;

    #[test]
    fn every_preset_parses_at_both_scales() {
        for p in &PRESETS {
            for scale in [Scale::Paper, Scale::Desk] {
                let text = config_text(p, scale);
                let cfg = RunConfig::from_toml(&text).unwrap_or_else(|e| panic!("{} {scale}: {e}\n{text}", p.name));
                assert_eq!(cfg.study.is_some(), p.action == Action::Converge, "{}", p.name);
                assert!(cfg.model_spec().is_ok());
            }
        }
    }

    #[test]
    fn coarsening_desk_matches_the_stated_setup() {
        let cfg = config(&find("ch-coarsening").unwrap(), Scale::Desk);
        assert_eq!(cfg.kind(), Some(ModelKind::CahnHilliard));
        let a = cfg.time.adaptive.as_ref().unwrap();
        assert_eq!((a.dt_min, a.dt_max, a.gamma), (1e-4, 0.1, 1e5));
        assert_eq!(cfg.time.final_time, 20.0);
        assert_eq!(cfg.initial.amplitude, Some(0.05));
    }

    #[test]
    fn crystallite_centers_are_even() {
        let cfg = config(&find("pfc-crystallites").unwrap(), Scale::Paper);
        assert_eq!(
            cfg.initial.centers.as_deref(),
            Some(&[[200.0, 400.0], [400.0, 400.0], [600.0, 400.0]][..])
        );
        let a = cfg.initial.angles.unwrap();
        assert!((a[0] + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn ladders_halve() {
        let cfg = config(&find("ac-order").unwrap(), Scale::Desk);
        let study = cfg.study.unwrap();
        assert_eq!(study.ladder, vec![0.1, 0.05, 0.025, 0.0125, 0.00625]);
        assert_eq!(study.reference_dt, 1e-4);
    }
}
