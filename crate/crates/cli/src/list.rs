//! `list`: the catalog of EOS families, chains, suites, presets and
//! `eval` quantities, in a fixed order.

use std::fmt::Write as _;

use serde::Serialize;
use thermoconvex::transforms::{named_chain, named_chains};

use crate::config::Suite;
use crate::eval::QUANTITIES;
use crate::presets::PRESETS;

pub const EOS_FAMILIES: [(&str, &str); 3] = [
    ("polytropic", "ideal polytropic gas; two of r, cv, cp, gamma; v0, s0, theta0"),
    ("tait", "Tait liquid; nu, k_r, u_r, v_r, s_r, theta_r, p_r, d, c_vr, optional c"),
    ("van-der-waals", "van der Waals fluid; a, b, r, cv, v0, s0, theta0"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainEntry {
    pub name: String,
    pub diagram: String,
    pub stages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    pub eos_families: Vec<Entry>,
    pub chains: Vec<ChainEntry>,
    pub suites: Vec<Entry>,
    pub presets: Vec<Entry>,
    pub quantities: Vec<Entry>,
}

fn entries(items: &[(&str, &str)]) -> Vec<Entry> {
    items
        .iter()
        .map(|(n, d)| Entry {
            name: n.to_string(),
            description: d.to_string(),
        })
        .collect()
}

pub fn catalog() -> Catalog {
    let chains = named_chains()
        .into_iter()
        .map(|(name, diagram)| {
            let spec = named_chain(name, 3).expect("built-in chain");
            let mut stages = vec![spec.start_name.clone()];
            stages.extend(spec.stages.iter().map(|s| format!("{} → {}", s.transform.kind(), s.name)));
            ChainEntry {
                name: name.to_string(),
                diagram: diagram.to_string(),
                stages,
            }
        })
        .collect();
    let suites: Vec<(&str, &str)> = Suite::ALL.iter().map(|s| (s.name(), s.describe())).collect();
    Catalog {
        eos_families: entries(&EOS_FAMILIES),
        chains,
        suites: entries(&suites),
        presets: entries(&PRESETS),
        quantities: entries(&QUANTITIES),
    }
}

impl Catalog {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let section = |out: &mut String, title: &str, items: &[Entry]| {
            let _ = writeln!(out, "{title}");
            for e in items {
                let _ = writeln!(out, "  {:<26}{}", e.name, e.description);
            }
        };
        section(&mut out, "eos families", &self.eos_families);
        let _ = writeln!(out, "chains");
        for c in &self.chains {
            let _ = writeln!(out, "  {:<26}{}", c.name, c.diagram);
            let _ = writeln!(out, "  {:<26}{}", "", c.stages.join(" | "));
        }
        section(&mut out, "suites", &self.suites);
        section(&mut out, "presets", &self.presets);
        section(&mut out, "quantities", &self.quantities);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_stable_and_complete() {
        let a = catalog().render();
        assert_eq!(a, catalog().render());
        for f in ["polytropic", "tait", "van-der-waals"] {
            assert!(a.contains(f));
        }
        for (name, _) in named_chains() {
            assert!(a.contains(name));
        }
        assert!(a.contains("S̄(ρ,M̄,Ē)"));
    }
}
