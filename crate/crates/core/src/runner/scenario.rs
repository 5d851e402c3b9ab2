use std::fmt;

use log::warn;
use serde::Serialize;

use super::RunConfig;
use crate::cooling::CoolingScenario;
use crate::ev::ChargingScheme;
use crate::gdp::GdpScenario;

/// One cell of the GDP × charging × cooling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ScenarioDescriptor {
    pub gdp: GdpScenario,
    pub charging: ChargingScheme,
    pub cooling: CoolingScenario,
    pub seed: u64,
}

impl ScenarioDescriptor {
    /// Relative output folder, e.g. `slow/home/efficient`.
    pub fn path(&self) -> String {
        format!("{}/{}/{}", self.gdp, self.charging, self.cooling)
    }
}

impl fmt::Display for ScenarioDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path())
    }
}

fn dedup<T: PartialEq + Copy + fmt::Display>(axis: &str, values: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for v in values {
        if out.contains(v) {
            warn!("duplicate {axis} value `{v}` ignored");
        } else {
            out.push(*v);
        }
    }
    out
}

/// Cartesian product of the configured axes, ordered by GDP, then charging,
/// then cooling.
pub fn enumerate_scenarios(config: &RunConfig) -> Vec<ScenarioDescriptor> {
    let gdp = dedup("gdp", &config.gdp);
    let charging = dedup("charging", &config.charging);
    let cooling = dedup("cooling", &config.cooling);
    let mut out = Vec::with_capacity(gdp.len() * charging.len() * cooling.len());
    for &g in GdpScenario::ALL.iter().filter(|g| gdp.contains(g)) {
        for &ch in ChargingScheme::ALL.iter().filter(|c| charging.contains(c)) {
            for &co in CoolingScenario::ALL.iter().filter(|c| cooling.contains(c)) {
                out.push(ScenarioDescriptor { gdp: g, charging: ch, cooling: co, seed: config.seed });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matrix_has_eighteen_cells() {
        let s = enumerate_scenarios(&RunConfig::default());
        assert_eq!(s.len(), 18);
        assert_eq!(s[0].path(), "slow/home/baseline");
        assert_eq!(s[17].path(), "rapid/public/efficient");
        let mut sorted = s.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 18);
    }

    #[test]
    fn restricted_and_duplicated_axes() {
        let config = RunConfig {
            gdp: vec![GdpScenario::Rapid, GdpScenario::Rapid],
            charging: vec![ChargingScheme::Home],
            cooling: vec![CoolingScenario::Efficient],
            ..RunConfig::default()
        };
        let s = enumerate_scenarios(&config);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].path(), "rapid/home/efficient");
    }
}
