//! Shipped example configs.

use std::path::PathBuf;

pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
}

pub const EXAMPLES: [Example; 5] = [
    Example { name: "fuchsian_tau3", description: "Hitchin/Veronese: τ_3 of a Fuchsian pair, α_2 = 2" },
    Example { name: "tau5_plus_tau2", description: "τ_5 ⊕ τ_2 of a Fuchsian pair: exact ratio α_2 = 3/2" },
    Example { name: "tau_d_plus_tau_d2", description: "τ_4 ⊕ τ_6: 1-Anosov but not 2-Anosov (exit 2 expected)" },
    Example {
        name: "su21_9dim",
        description: "SU(2,1) pair in dimension 9: smooth 1-limit set, yet not 4-Anosov (exit 2 expected)",
    },
    Example { name: "schottky_sl2", description: "Schottky pair in SL_2: gap certification" },
];

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

impl Example {
    pub fn path(&self) -> PathBuf {
        configs_dir().join(format!("{}.json", self.name))
    }
}
