//! Shipped gadget and fixture files.
//!
//! Copies of every file in `data/` are compiled in. Setting `KS_FORGE_DATA`
//! to a directory makes files found there take precedence.

use std::path::PathBuf;

use crate::assignments::SolverConfig;
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::reductions::{
    constructed_strong_gadget, iterated_step_with, iterated_topology, reduction_topology, strong_upper, StepConfig,
    StrongGadget,
};
use crate::vec3::{Ray, Vector3};

pub const DATA_ENV: &str = "KS_FORGE_DATA";

/// File name of an externally supplied strong Kochen-Specker gadget.
pub const STRONG_KS_FILE: &str = "strong_ks_24.json";

pub struct Builtin {
    pub name: &'static str,
    pub file: &'static str,
    pub summary: &'static str,
    embedded: &'static str,
    generate: fn() -> Result<Diagram>,
}

impl Builtin {
    /// Rebuilds the file's diagram from the library.
    pub fn generate(&self) -> Result<Diagram> {
        (self.generate)()
    }

    pub fn embedded(&self) -> &'static str {
        self.embedded
    }
}

static BUILTINS: [Builtin; 5] = [
    Builtin {
        name: "fig1_reduction",
        file: "fig1_reduction.json",
        summary: "reduction gadget topology",
        embedded: include_str!("../../../data/fig1_reduction.json"),
        generate: || Ok(reduction_topology()),
    },
    Builtin {
        name: "fig2_iterated",
        file: "fig2_iterated.json",
        summary: "iterated-step gadget topology",
        embedded: include_str!("../../../data/fig2_iterated.json"),
        generate: || Ok(iterated_topology()),
    },
    Builtin {
        name: "fig2_anchor",
        file: "fig2_anchor.json",
        summary: "iterated-step gadget realized at overlap 1/√2",
        embedded: include_str!("../../../data/fig2_anchor.json"),
        generate: fig2_anchor,
    },
    Builtin {
        name: "strong_ks_constructed",
        file: "strong_ks_constructed.json",
        summary: "constructed strong Kochen-Specker gadget at overlap 3/√14",
        embedded: include_str!("../../../data/strong_ks_constructed.json"),
        generate: || constructed_strong_gadget(strong_upper()),
    },
    Builtin {
        name: "peres_completed",
        file: "peres_completed.json",
        summary: "Peres' 33 rays with every orthogonal pair completed to a context; uncolorable",
        embedded: include_str!("../../../data/peres_completed.json"),
        generate: peres_completed,
    },
];

pub fn builtins() -> &'static [Builtin] {
    &BUILTINS
}

pub fn builtin(name: &str) -> Result<&'static Builtin> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    BUILTINS
        .iter()
        .find(|b| b.name == stem)
        .ok_or_else(|| Error::Data(format!("no built-in data file named {name}")))
}

fn override_path(file: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(DATA_ENV)?;
    let path = PathBuf::from(dir).join(file);
    path.is_file().then_some(path)
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Text of a built-in file, from `$KS_FORGE_DATA` if present there.
pub fn load_text(name: &str) -> Result<String> {
    let b = builtin(name)?;
    match override_path(b.file) {
        Some(p) => read(&p),
        None => Ok(b.embedded.to_string()),
    }
}

pub fn load_diagram(name: &str) -> Result<Diagram> {
    Diagram::from_json(&load_text(name)?)
}

/// The strong gadget for witness construction: `$KS_FORGE_DATA/strong_ks_24.json`
/// if present, else the shipped constructed gadget. Either must pass the
/// [`StrongGadget::from_data`] gate.
pub fn strong_gadget(tol: f64, cfg: &SolverConfig) -> Result<StrongGadget> {
    let text = match override_path(STRONG_KS_FILE) {
        Some(p) => read(&p)?,
        None => load_text("strong_ks_constructed")?,
    };
    StrongGadget::from_data(Diagram::from_json(&text)?, tol, cfg)
}

fn fig2_anchor() -> Result<Diagram> {
    let p = std::f64::consts::FRAC_1_SQRT_2;
    let a = Ray::x_axis();
    let b = Ray::new(Vector3::new(p, p, 0.0))?;
    let mut d = iterated_step_with(a, b, &StepConfig::relaxed())?.gadget(1e-12)?;
    d.description = Some("iterated-step gadget realized at a = (1,0,0), b = (1,1,0)/√2".into());
    Ok(d)
}

/// Peres' 33 rays (permutations of `(1,0,0)`, `(1,±1,0)`, `(0,1,±√2)`,
/// `(1,±1,±√2)`), plus the cross product of every orthogonal pair.
pub fn peres_completed() -> Result<Diagram> {
    let s = std::f64::consts::SQRT_2;
    let base = [
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, -1.0, 0.0],
        [0.0, 1.0, s],
        [0.0, 1.0, -s],
        [1.0, 1.0, s],
        [1.0, 1.0, -s],
        [1.0, -1.0, s],
        [1.0, -1.0, -s],
    ];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut rays: Vec<Ray> = Vec::new();
    let push = |r: Ray, rays: &mut Vec<Ray>| {
        if !rays.iter().any(|q| q.same_as(r, 1e-9)) {
            rays.push(r);
        }
    };
    for v in base {
        for p in perms {
            push(Ray::normalize(Vector3::new(v[p[0]], v[p[1]], v[p[2]]))?, &mut rays);
        }
    }
    let n = rays.len();
    debug_assert_eq!(n, 33);
    for i in 0..n {
        for j in i + 1..n {
            if rays[i].inner(rays[j]) <= 1e-9 {
                push(Ray::normalize(rays[i].vector().cross(rays[j].vector()))?, &mut rays);
            }
        }
    }
    let named: Vec<(String, Ray)> = rays
        .into_iter()
        .enumerate()
        .map(|(i, r)| (format!("r{:02}", i + 1), r))
        .collect();
    let mut d = Diagram::from_rays(&named, 1e-9)?;
    d.description = Some("Peres 33-ray set with all orthogonal pairs completed to triads".into());
    Ok(d)
}
