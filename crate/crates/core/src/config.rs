use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding a JSON object of cap overrides.
pub const CAPS_ENV: &str = "CENSUS_LAB_CAPS";

/// Size limits for exact tables, dynamic programs and rejection loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub census_max_vertices: u64,
    pub census_max_edges: u64,
    /// Largest `k` for the exact joint (TREE, M) dynamic program.
    pub exact_joint_k: u64,
    /// Largest `k` for the exact TREE-only dynamic program.
    pub exact_tree_k: u64,
    pub brute_force_k: u64,
    /// Trials before the graph sampler gives up.
    pub retry_budget: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            census_max_vertices: 200,
            census_max_edges: 800,
            exact_joint_k: 30,
            exact_tree_k: 200,
            brute_force_k: 7,
            retry_budget: 10_000_000,
        }
    }
}

impl Caps {
    /// Defaults, overridden field by field from `CENSUS_LAB_CAPS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(CAPS_ENV) {
            Ok(raw) if !raw.trim().is_empty() => serde_json::from_str(&raw)
                .map_err(|e| Error::Domain(format!("{CAPS_ENV}: {e}"))),
            _ => Ok(Caps::default()),
        }
    }

    pub(crate) fn check_census(&self, vertices: u64, edges: u64) -> Result<()> {
        check("vertices", vertices, self.census_max_vertices)?;
        check("edges", edges, self.census_max_edges)
    }
}

pub(crate) fn check(what: &'static str, requested: u64, cap: u64) -> Result<()> {
    if requested > cap {
        Err(Error::CapExceeded {
            what,
            requested,
            cap,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_override() {
        let caps: Caps = serde_json::from_str(r#"{"exact_joint_k": 12}"#).unwrap();
        assert_eq!(caps.exact_joint_k, 12);
        assert_eq!(caps.census_max_vertices, Caps::default().census_max_vertices);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(serde_json::from_str::<Caps>(r#"{"bogus": 1}"#).is_err());
    }
}
