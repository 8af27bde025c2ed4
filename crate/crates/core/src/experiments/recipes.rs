use serde::{Deserialize, Serialize};

use super::{Axis, BetaRule, DesignKind, Estimator, Metric, SweepSpec};
use crate::error::{Error, Result};
use crate::noise::{PhaseNoiseKind, PhaseNoiseModel};
use crate::rates::SicMode;
use crate::scene::HardwareQuality;

/// A named family of sweeps drawn on one figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub description: String,
    pub series: Vec<SweepSpec>,
}

impl Recipe {
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.series.iter_mut().for_each(|s| s.trials = trials);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.series.iter_mut().for_each(|s| s.seed = seed);
        self
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// `0.01, 0.02, …, 0.99`.
fn fractions() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

fn noise(kind: PhaseNoiseKind, power: f64) -> PhaseNoiseModel {
    PhaseNoiseModel::new(kind, power).expect("preset noise powers are valid")
}

fn kind_label(kind: PhaseNoiseKind) -> &'static str {
    match kind {
        PhaseNoiseKind::None => "none",
        PhaseNoiseKind::VonMises => "vm",
        PhaseNoiseKind::Uniform => "uf",
    }
}

fn eps_label(eps: f64) -> String {
    if eps == 1.0 {
        "eps1".into()
    } else {
        format!("eps1m{}", (1.0 - eps).log10().round().abs())
    }
}

fn base(name: String, axis: Axis, values: Vec<f64>) -> SweepSpec {
    SweepSpec::new(name, axis, values)
}

fn fig3() -> Recipe {
    let mut series = Vec::new();
    for kind in [PhaseNoiseKind::VonMises, PhaseNoiseKind::Uniform] {
        for eps in [1.0, 1.0 - 1e-2, 1.0 - 1e-1] {
            for k in [2, 10] {
                let mut s = base(
                    format!("fig3_{}_{}_K{k}", kind_label(kind), eps_label(eps)),
                    Axis::SnrDb,
                    grid(-10.0, 60.0, 10.0),
                );
                s.scene.phase_noise = noise(kind, 0.1);
                s.scene.hardware = HardwareQuality::uniform(eps);
                s.pilot_len = k;
                s.metrics = vec![Metric::NmseLmmse, Metric::NmseLs];
                series.push(s);
            }
        }
    }
    Recipe {
        name: "fig3".into(),
        description: "channel estimation N-MSE versus SNR for LMMSE and LS".into(),
        series,
    }
}

fn fig3b() -> Recipe {
    let mut series = Vec::new();
    for kind in [PhaseNoiseKind::VonMises, PhaseNoiseKind::Uniform] {
        for eps in [1.0, 1.0 - 1e-2, 1.0 - 1e-1] {
            let mut s = base(
                format!("fig3b_{}_{}", kind_label(kind), eps_label(eps)),
                Axis::PilotLen,
                vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
            );
            s.scene.phase_noise = noise(kind, 0.1);
            s.scene.hardware = HardwareQuality::uniform(eps);
            s.metrics = vec![Metric::NmseLmmse];
            series.push(s);
        }
    }
    Recipe {
        name: "fig3b".into(),
        description: "LMMSE N-MSE versus pilot length at 0 dB".into(),
        series,
    }
}

fn phase_noise_grid() -> Vec<(PhaseNoiseKind, f64)> {
    vec![
        (PhaseNoiseKind::None, 0.0),
        (PhaseNoiseKind::VonMises, 0.1),
        (PhaseNoiseKind::Uniform, 0.1),
        (PhaseNoiseKind::VonMises, 0.8),
        (PhaseNoiseKind::Uniform, 0.8),
    ]
}

fn fig4(tag: &str, axis: Axis, values: Vec<f64>, description: &str) -> Recipe {
    let series = phase_noise_grid()
        .into_iter()
        .map(|(kind, power)| {
            let label = match kind {
                PhaseNoiseKind::None => "pn0".to_string(),
                _ => format!("{}{power}", kind_label(kind)),
            };
            let mut s = base(format!("{tag}_{label}"), axis, values.clone());
            s.scene.phase_noise = noise(kind, power);
            s.pilot_len = 50;
            s
        })
        .collect();
    Recipe {
        name: tag.into(),
        description: description.into(),
        series,
    }
}

fn fig5() -> Recipe {
    let mut series = Vec::new();
    for eps in [1.0, 1.0 - 1e-2] {
        for design in [DesignKind::Optimal, DesignKind::Random] {
            for n in [400, 800] {
                let d = match design {
                    DesignKind::Optimal => "opt",
                    DesignKind::Random => "rand",
                };
                let mut s = base(
                    format!("fig5_{d}_N{n}_{}", eps_label(eps)),
                    Axis::SnrDb,
                    grid(-10.0, 30.0, 5.0),
                );
                s.scene.set_elements(n);
                s.scene.hardware = HardwareQuality::uniform(eps);
                s.phase_design = design;
                s.pilot_len = 50;
                series.push(s);
            }
        }
    }
    Recipe {
        name: "fig5".into(),
        description: "sum rate versus SNR, optimal against random phases, N = 400 and 800".into(),
        series,
    }
}

fn rate_pair_metrics() -> Vec<Metric> {
    vec![
        Metric::RateTNoma,
        Metric::RateRNoma,
        Metric::SumRateNoma,
        Metric::RateTOma,
        Metric::RateROma,
        Metric::SumRateOma,
    ]
}

fn fig6() -> Recipe {
    let series = [(0.0, 0.0), (10.0, -10.0), (20.0, -20.0)]
        .into_iter()
        .map(|(gt, gr)| {
            let mut s = base(format!("fig6_gt{gt}_gr{gr}"), Axis::Fraction, fractions());
            s.snr_t_db = gt;
            s.snr_r_db = gr;
            s.scene.phase_noise = noise(PhaseNoiseKind::Uniform, 0.1);
            s.metrics = rate_pair_metrics();
            s
        })
        .collect();
    Recipe {
        name: "fig6".into(),
        description: "NOMA and OMA rate pairs versus the decoding share or resource share".into(),
        series,
    }
}

fn fig78(name: &str, gt: f64, gr: f64) -> Recipe {
    let series = [1.0, 1.0 - 1e-4, 1.0 - 1e-3]
        .into_iter()
        .map(|eps| {
            let mut s = base(format!("{name}_{}", eps_label(eps)), Axis::Fraction, fractions());
            s.snr_t_db = gt;
            s.snr_r_db = gr;
            s.scene.phase_noise = noise(PhaseNoiseKind::Uniform, 0.1);
            s.scene.hardware = HardwareQuality::uniform(eps);
            s.estimator = Estimator::Genie;
            s.metrics = rate_pair_metrics();
            s
        })
        .collect();
    Recipe {
        name: name.into(),
        description: format!("rate pairs with perfect channel knowledge at {gt} dB / {gr} dB"),
        series,
    }
}

fn fig9() -> Recipe {
    let mut series = Vec::new();
    for eps in [1.0, 1.0 - 1e-3, 1.0 - 1e-2] {
        for eta in [0.0, 0.1, 0.3] {
            let mut s = base(
                format!("fig9_{}_eta{eta}", eps_label(eps)),
                Axis::SnrDb,
                grid(-10.0, 50.0, 5.0),
            );
            s.scene.phase_noise = noise(PhaseNoiseKind::Uniform, 0.1);
            s.scene.hardware = HardwareQuality::uniform(eps);
            s.sic = if eta == 0.0 {
                SicMode::Perfect
            } else {
                SicMode::Imperfect { eta }
            };
            s.beta = BetaRule::Optimal;
            series.push(s);
        }
    }
    Recipe {
        name: "fig9".into(),
        description: "sum rate versus SNR under imperfect SIC".into(),
        series,
    }
}

/// Every preset, with 10⁴ trials per point and seed 1.
pub fn figure_recipes() -> Vec<Recipe> {
    vec![
        fig3(),
        fig3b(),
        fig4("fig4a", Axis::SnrDb, grid(-10.0, 30.0, 5.0), "sum rate versus SNR for several phase-noise levels"),
        fig4(
            "fig4b",
            Axis::NElements,
            vec![100.0, 200.0, 400.0, 800.0, 1600.0],
            "sum rate versus elements per panel at 0 dB",
        ),
        fig4(
            "fig4c",
            Axis::PilotLen,
            vec![2.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0, 200.0],
            "sum rate versus pilot length at 0 dB",
        ),
        fig5(),
        fig6(),
        fig78("fig7", 0.0, 0.0),
        fig78("fig8", 20.0, -20.0),
        fig9(),
    ]
}

pub fn recipe(name: &str) -> Result<Recipe> {
    let all = figure_recipes();
    let available = all.iter().map(|r| r.name.clone()).collect::<Vec<_>>().join(", ");
    all.into_iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::UnknownRecipe {
            name: name.into(),
            available,
        })
}
