//! Bundled experiment configurations for each figure.

use super::{ExperimentConfig, HarnessError};

/// A named figure with its config files.
#[derive(Debug, Clone)]
pub struct Bundled {
    pub figure: &'static str,
    /// `(stem, config text)` pairs.
    pub files: &'static [(&'static str, &'static str)],
}

impl Bundled {
    pub fn configs(&self) -> Result<Vec<(&'static str, ExperimentConfig)>, HarnessError> {
        self.files
            .iter()
            .map(|(stem, text)| ExperimentConfig::parse(text).map(|c| (*stem, c)))
            .collect()
    }
}

pub fn bundled_names() -> &'static [&'static str] {
    &["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"]
}

pub fn bundled(figure: &str) -> Option<Bundled> {
    let files: &'static [(&'static str, &'static str)] = match figure {
        "fig1" => &[
            ("fig1", include_str!("../../configs/fig1.cfg")),
        ],
        "fig2" => &[
            ("fig2", include_str!("../../configs/fig2.cfg")),
        ],
        "fig3" => &[
            ("fig3", include_str!("../../configs/fig3.cfg")),
        ],
        "fig4" => &[
            ("fig4_grid", include_str!("../../configs/fig4_grid.cfg")),
            ("fig4_pa", include_str!("../../configs/fig4_pa.cfg")),
            ("fig4_star", include_str!("../../configs/fig4_star.cfg")),
            ("fig4_ws", include_str!("../../configs/fig4_ws.cfg")),
        ],
        "fig5" => &[
            ("fig5_grid", include_str!("../../configs/fig5_grid.cfg")),
            ("fig5_pa", include_str!("../../configs/fig5_pa.cfg")),
            ("fig5_star", include_str!("../../configs/fig5_star.cfg")),
            ("fig5_ws", include_str!("../../configs/fig5_ws.cfg")),
        ],
        "fig6" => &[
            ("fig6_er", include_str!("../../configs/fig6_er.cfg")),
            ("fig6_grid", include_str!("../../configs/fig6_grid.cfg")),
            ("fig6_pa", include_str!("../../configs/fig6_pa.cfg")),
            ("fig6_ws", include_str!("../../configs/fig6_ws.cfg")),
        ],
        "fig7" => &[
            ("fig7_er", include_str!("../../configs/fig7_er.cfg")),
            ("fig7_grid", include_str!("../../configs/fig7_grid.cfg")),
            ("fig7_pa", include_str!("../../configs/fig7_pa.cfg")),
            ("fig7_ws", include_str!("../../configs/fig7_ws.cfg")),
        ],
        _ => return None,
    };
    let figure = bundled_names().iter().find(|n| **n == figure)?;
    Some(Bundled { figure, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_config_parses() {
        for name in bundled_names() {
            let b = bundled(name).unwrap();
            assert!(!b.configs().unwrap().is_empty());
        }
        assert!(bundled("fig9").is_none());
    }
}
