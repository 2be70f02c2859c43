//! Plain-text run configuration: one `key = value` per line, `#` comments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use cgsat::basis::BasisKind;
use cgsat::mesh::{generate_mesh, Mesh, MeshSpec};
use cgsat::problems::{by_name, ProblemSpec};
use cgsat::timeint::{MassSolver, Scheme};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    /// Mesh file path or generator spec (`square:N`, `disk:N`,
    /// `annulus:R0:R1:N`, `interval:N`, `random-interval:N`).
    pub mesh: Option<String>,
    /// Replaces `N` of the problem's own generator.
    pub cells: Option<usize>,
    pub order: Option<usize>,
    pub basis: Option<BasisKind>,
    pub volume_quad: Option<usize>,
    pub edge_quad: Option<usize>,
    pub split_alpha: Option<f64>,
    pub sat_scale: Option<f64>,
    pub scheme: Option<Scheme>,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
    pub max_steps: Option<usize>,
    pub blowup: Option<f64>,
    pub mass_solver: Option<MassSolver>,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "advection2d".into(),
            mesh: None,
            cells: None,
            order: None,
            basis: None,
            volume_quad: None,
            edge_quad: None,
            split_alpha: None,
            sat_scale: None,
            scheme: None,
            cfl: None,
            t_end: None,
            max_steps: None,
            blowup: None,
            mass_solver: None,
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| anyhow!("bad value {v:?} for '{key}': {e}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value'", n + 1))?;
            c.set(k.trim(), v.trim())
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "problem" => self.problem = v.to_string(),
            "mesh" => self.mesh = Some(v.to_string()),
            "cells" => self.cells = Some(parse_value(key, v)?),
            "order" => self.order = Some(parse_value(key, v)?),
            "basis" => self.basis = Some(parse_value(key, v)?),
            "volume_quad" => self.volume_quad = Some(parse_value(key, v)?),
            "edge_quad" => self.edge_quad = Some(parse_value(key, v)?),
            "split_alpha" => self.split_alpha = Some(parse_value(key, v)?),
            "sat_scale" => self.sat_scale = Some(parse_value(key, v)?),
            "scheme" => self.scheme = Some(parse_value(key, v)?),
            "cfl" => self.cfl = Some(parse_value(key, v)?),
            "t_end" => self.t_end = Some(parse_value(key, v)?),
            "max_steps" => self.max_steps = Some(parse_value(key, v)?),
            "blowup" => self.blowup = Some(parse_value(key, v)?),
            "mass_solver" => self.mass_solver = Some(parse_value(key, v)?),
            "output" => self.output = PathBuf::from(v),
            "seed" => self.seed = parse_value(key, v)?,
            _ => bail!("unknown config key '{key}'"),
        }
        Ok(())
    }

    /// Unset options are omitted; floats use the shortest exact form, so
    /// `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        fn opt<T: std::fmt::Display>(s: &mut String, k: &str, v: &Option<T>) {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        fn optf(s: &mut String, k: &str, v: Option<f64>) {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v:?}");
            }
        }
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem);
        opt(&mut s, "mesh", &self.mesh);
        opt(&mut s, "cells", &self.cells);
        opt(&mut s, "order", &self.order);
        opt(&mut s, "basis", &self.basis);
        opt(&mut s, "volume_quad", &self.volume_quad);
        opt(&mut s, "edge_quad", &self.edge_quad);
        optf(&mut s, "split_alpha", self.split_alpha);
        optf(&mut s, "sat_scale", self.sat_scale);
        opt(&mut s, "scheme", &self.scheme);
        optf(&mut s, "cfl", self.cfl);
        optf(&mut s, "t_end", self.t_end);
        opt(&mut s, "max_steps", &self.max_steps);
        optf(&mut s, "blowup", self.blowup);
        opt(&mut s, "mass_solver", &self.mass_solver);
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// The named problem with every override applied. Explicit quadrature
    /// degrees switch off the SBP guard so mismatched rules can be studied.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut p = by_name(&self.problem)?;
        if let Some(n) = self.cells {
            p.mesh = with_resolution(&p.mesh, n, self.seed);
        }
        if let Some(m) = &self.mesh {
            if let Some(spec) = parse_generator(m, self.seed)? {
                p.mesh = spec;
            }
        }
        if let Some(o) = self.order {
            p.order = o;
        }
        if let Some(b) = self.basis {
            p.basis = b;
        }
        if self.volume_quad.is_some() || self.edge_quad.is_some() {
            p.volume_degree = self.volume_quad.or(p.volume_degree);
            p.edge_degree = self.edge_quad.or(p.edge_degree);
            p.allow_non_sbp = true;
        }
        if let Some(a) = self.split_alpha {
            p.split_alpha = a;
        }
        if let Some(s) = self.sat_scale {
            p.sat_scale = s;
        }
        let it = &mut p.integrator;
        if let Some(s) = self.scheme {
            it.scheme = s;
        }
        if let Some(c) = self.cfl {
            it.cfl = c;
        }
        if let Some(t) = self.t_end {
            it.t_end = t;
            it.max_steps = None;
        }
        if self.max_steps.is_some() {
            it.max_steps = self.max_steps;
        }
        if self.blowup.is_some() {
            it.blowup_threshold = self.blowup;
        }
        if let Some(s) = self.mass_solver {
            it.mass_solver = s;
        }
        it.validate()?;
        Ok(p)
    }

    /// Mesh for `spec`: the file named by `mesh` if it is not a generator
    /// spec, otherwise the spec's generator.
    pub fn build_mesh(&self, spec: &ProblemSpec) -> Result<Mesh> {
        match &self.mesh {
            Some(m) if parse_generator(m, self.seed)?.is_none() => {
                Mesh::load(m).with_context(|| format!("loading mesh {m}"))
            }
            _ => Ok(generate_mesh(&spec.mesh)?),
        }
    }
}

pub fn with_resolution(spec: &MeshSpec, n: usize, seed: u64) -> MeshSpec {
    match *spec {
        MeshSpec::UnitSquare(_) => MeshSpec::UnitSquare(n),
        MeshSpec::UnitDisk(_) => MeshSpec::UnitDisk(n),
        MeshSpec::Annulus { r0, r1, .. } => MeshSpec::Annulus { r0, r1, n },
        MeshSpec::Interval { random, .. } => MeshSpec::Interval { n, random, seed },
    }
}

/// `Ok(None)` when `s` does not look like a generator spec (a file path).
pub fn parse_generator(s: &str, seed: u64) -> Result<Option<MeshSpec>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<usize> { parse_value("mesh", parts[i]) };
    let spec = match (parts[0], parts.len()) {
        ("square", 2) => MeshSpec::UnitSquare(num(1)?),
        ("disk", 2) => MeshSpec::UnitDisk(num(1)?),
        ("interval", 2) => MeshSpec::Interval {
            n: num(1)?,
            random: false,
            seed,
        },
        ("random-interval", 2) => MeshSpec::Interval {
            n: num(1)?,
            random: true,
            seed,
        },
        ("annulus", 4) => MeshSpec::Annulus {
            r0: parse_value("mesh", parts[1])?,
            r1: parse_value("mesh", parts[2])?,
            n: num(3)?,
        },
        ("square" | "disk" | "interval" | "random-interval" | "annulus", _) => {
            bail!("malformed mesh generator spec '{s}'")
        }
        _ => return Ok(None),
    };
    Ok(Some(spec))
}
