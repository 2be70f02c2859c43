//! 1D interval grids and 2D conforming triangulations with tagged boundary
//! faces, an ASCII reader/writer, and simple generators.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFace {
    pub element: usize,
    pub local_face: usize,
    pub tag: String,
    /// Outward unit normal; `(±1, 0)` in 1D.
    pub normal: [f64; 2],
    /// Face measure (edge length; 1 for a 1D end point).
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 2]>,
    elements: Vec<usize>,
    boundary: Vec<BoundaryFace>,
}

/// Generator recipes.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    UnitSquare(usize),
    UnitDisk(usize),
    Annulus { r0: f64, r1: f64, n: usize },
    Interval { n: usize, random: bool, seed: u64 },
}

impl Mesh {
    /// Builds a mesh from raw data and validates all invariants. Boundary
    /// faces are given as `(element, local face, tag)`; normals and measures
    /// are computed here.
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        elements: Vec<usize>,
        boundary: Vec<(usize, usize, String)>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} not supported"
            )));
        }
        let nv = dim + 1;
        if !elements.len().is_multiple_of(nv) {
            return Err(Error::DimensionMismatch(
                "element connectivity length is not a multiple of the vertex count".into(),
            ));
        }
        let mut mesh = Mesh {
            dim,
            vertices,
            elements,
            boundary: Vec::new(),
        };
        mesh.validate_elements()?;
        let faces = mesh.boundary_face_set()?;
        let mut listed = HashMap::new();
        for (element, local_face, tag) in boundary {
            if element >= mesh.num_elements() || local_face >= nv {
                return Err(Error::NonConforming(format!(
                    "boundary face ({element}, {local_face}) does not exist"
                )));
            }
            let key = mesh.face_key(element, local_face);
            if !faces.contains_key(&key) {
                return Err(Error::NonConforming(format!(
                    "listed boundary face ({element}, {local_face}) is an interior face"
                )));
            }
            if listed.insert(key, element).is_some() {
                return Err(Error::NonConforming(format!(
                    "boundary face ({element}, {local_face}) listed twice"
                )));
            }
            let (normal, measure) = mesh.face_normal(element, local_face);
            mesh.boundary.push(BoundaryFace {
                element,
                local_face,
                tag,
                normal,
                measure,
            });
        }
        if listed.len() != faces.len() {
            return Err(Error::NonConforming(format!(
                "{} faces lie on the boundary but {} are listed",
                faces.len(),
                listed.len()
            )));
        }
        Ok(mesh)
    }

    /// Builds a mesh whose boundary faces are discovered topologically and
    /// tagged by `tagger(midpoint, normal)`.
    pub fn with_tagger(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        elements: Vec<usize>,
        tagger: impl Fn([f64; 2], [f64; 2]) -> String,
    ) -> Result<Self> {
        let probe = Mesh {
            dim,
            vertices,
            elements,
            boundary: Vec::new(),
        };
        probe.validate_elements()?;
        let mut faces: Vec<(usize, usize)> = probe.boundary_face_set()?.into_values().collect();
        faces.sort_unstable();
        let boundary = faces
            .into_iter()
            .map(|(e, f)| {
                let (n, _) = probe.face_normal(e, f);
                let [a, b] = probe.face_vertices(e, f);
                let (pa, pb) = (probe.vertices[a], probe.vertices[b]);
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                (e, f, tagger(mid, n))
            })
            .collect();
        Mesh::new(dim, probe.vertices, probe.elements, boundary)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    pub fn vertices_per_element(&self) -> usize {
        self.dim + 1
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elements[e * nv..(e + 1) * nv]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.elements.chunks(self.dim + 1)
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary
    }

    /// Global vertex indices of a local face. In 1D both entries coincide.
    pub fn face_vertices(&self, e: usize, f: usize) -> [usize; 2] {
        let el = self.element(e);
        if self.dim == 1 {
            [el[f], el[f]]
        } else {
            [el[f], el[(f + 1) % 3]]
        }
    }

    fn face_key(&self, e: usize, f: usize) -> (usize, usize) {
        let [a, b] = self.face_vertices(e, f);
        (a.min(b), a.max(b))
    }

    /// Signed measure (length or area) of element `e`.
    pub fn signed_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        let v = |i: usize| self.vertices[el[i]];
        if self.dim == 1 {
            v(1)[0] - v(0)[0]
        } else {
            let (a, b, c) = (v(0), v(1), v(2));
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        }
    }

    /// Cell width in 1D; incircle diameter in 2D.
    pub fn element_size(&self, e: usize) -> f64 {
        if self.dim == 1 {
            return self.signed_measure(e);
        }
        let el = self.element(e);
        let perimeter: f64 = (0..3)
            .map(|k| dist(self.vertices[el[k]], self.vertices[el[(k + 1) % 3]]))
            .sum();
        4.0 * self.signed_measure(e) / perimeter
    }

    pub fn min_element_size(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.element_size(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_element_diameter(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| {
                let el = self.element(e);
                let mut d: f64 = 0.0;
                for i in 0..el.len() {
                    for j in i + 1..el.len() {
                        d = d.max(dist(self.vertices[el[i]], self.vertices[el[j]]));
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.signed_measure(e))
            .sum()
    }

    pub fn boundary_measure(&self) -> f64 {
        self.boundary.iter().map(|f| f.measure).sum()
    }

    fn face_normal(&self, e: usize, f: usize) -> ([f64; 2], f64) {
        if self.dim == 1 {
            return (if f == 0 { [-1.0, 0.0] } else { [1.0, 0.0] }, 1.0);
        }
        let [a, b] = self.face_vertices(e, f);
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = d[0].hypot(d[1]);
        ([d[1] / len, -d[0] / len], len)
    }

    fn validate_elements(&self) -> Result<()> {
        let nv = self.num_vertices();
        let mut used = vec![false; nv];
        for &v in &self.elements {
            if v >= nv {
                return Err(Error::NonConforming(format!(
                    "vertex index {v} out of range"
                )));
            }
            used[v] = true;
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::NonConforming(format!(
                "vertex {v} belongs to no element"
            )));
        }
        for e in 0..self.num_elements() {
            let el = self.element(e);
            let h = (1..el.len())
                .map(|k| dist(self.vertices[el[0]], self.vertices[el[k]]))
                .fold(0.0, f64::max);
            let measure = self.signed_measure(e);
            let threshold = if self.dim == 1 {
                1e-14 * h
            } else {
                1e-14 * h * h
            };
            if !(measure > threshold) {
                return Err(Error::DegenerateElement {
                    element: e,
                    measure,
                });
            }
        }
        Ok(())
    }

    /// Faces owned by exactly one element, keyed by sorted vertex pair.
    fn boundary_face_set(&self) -> Result<HashMap<(usize, usize), (usize, usize)>> {
        let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
        for e in 0..self.num_elements() {
            for f in 0..=self.dim {
                let entry = count.entry(self.face_key(e, f)).or_insert((0, (e, f)));
                entry.0 += 1;
            }
        }
        let mut out = HashMap::new();
        for (key, (n, owner)) in count {
            match n {
                1 => {
                    out.insert(key, owner);
                }
                2 => {}
                _ => {
                    return Err(Error::NonConforming(format!(
                        "face {key:?} is shared by {n} elements"
                    )))
                }
            }
        }
        if self.dim == 2 {
            self.check_hanging_nodes(&out)?;
        } else if out.len() != 2 {
            return Err(Error::NonConforming(format!(
                "1D grid must be a single interval, found {} end points",
                out.len()
            )));
        }
        Ok(out)
    }

    // A hanging node shows up as a vertex of a one-sided face lying strictly
    // inside another one-sided face.
    fn check_hanging_nodes(&self, faces: &HashMap<(usize, usize), (usize, usize)>) -> Result<()> {
        let mut candidates: Vec<usize> = faces.keys().flat_map(|&(a, b)| [a, b]).collect();
        candidates.sort_unstable();
        candidates.dedup();
        // bucket candidates on a coarse grid to keep this near-linear
        let (lo, hi) = bounding_box(&self.vertices);
        let cells = (candidates.len() as f64).sqrt().ceil().max(1.0) as usize;
        let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let cell_of = |p: [f64; 2]| {
            let cx = (((p[0] - lo[0]) / span[0]) * cells as f64) as usize;
            let cy = (((p[1] - lo[1]) / span[1]) * cells as f64) as usize;
            (cx.min(cells - 1), cy.min(cells - 1))
        };
        let mut buckets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for &v in &candidates {
            buckets
                .entry(cell_of(self.vertices[v]))
                .or_default()
                .push(v);
        }
        for &(a, b) in faces.keys() {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len = dist(pa, pb);
            let (ca, cb) = (cell_of(pa), cell_of(pb));
            for cx in ca.0.min(cb.0)..=ca.0.max(cb.0) {
                for cy in ca.1.min(cb.1)..=ca.1.max(cb.1) {
                    for &v in buckets.get(&(cx, cy)).map(Vec::as_slice).unwrap_or(&[]) {
                        if v == a || v == b {
                            continue;
                        }
                        let p = self.vertices[v];
                        let t = ((p[0] - pa[0]) * (pb[0] - pa[0])
                            + (p[1] - pa[1]) * (pb[1] - pa[1]))
                            / (len * len);
                        let cross =
                            (p[0] - pa[0]) * (pb[1] - pa[1]) - (p[1] - pa[1]) * (pb[0] - pa[0]);
                        if t > 1e-10 && t < 1.0 - 1e-10 && cross.abs() / len < 1e-12 * len {
                            return Err(Error::NonConforming(format!(
                                "hanging node {v} on face ({a}, {b})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of file while reading {what}"),
            })
        };
        let (line, header) = next("header")?;
        let h: Vec<usize> = parse_fields(line, header)?;
        if h.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: "header must be `dim nv ne nb`".into(),
            });
        }
        let (dim, nv, ne, nb) = (h[0], h[1], h[2], h[3]);
        if dim != 1 && dim != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("dimension {dim} not supported"),
            });
        }
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = next("vertices")?;
            let c: Vec<f64> = parse_fields(line, l)?;
            if c.len() != dim {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {dim} coordinates, found {}", c.len()),
                });
            }
            vertices.push([c[0], if dim == 2 { c[1] } else { 0.0 }]);
        }
        let mut elements = Vec::with_capacity(ne * (dim + 1));
        for _ in 0..ne {
            let (line, l) = next("elements")?;
            let c: Vec<usize> = parse_fields(line, l)?;
            if c.len() != dim + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} vertex indices, found {}", dim + 1, c.len()),
                });
            }
            elements.extend(c);
        }
        let mut boundary = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (line, l) = next("boundary faces")?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line,
                    msg: "boundary line must be `elem face tag`".into(),
                });
            }
            let e = parse_one::<usize>(line, parts[0])?;
            let f = parse_one::<usize>(line, parts[1])?;
            boundary.push((e, f, parts[2].to_string()));
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse {
                line,
                msg: "trailing data after boundary section".into(),
            });
        }
        Mesh::new(dim, vertices, elements, boundary)
    }

    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.dim,
            self.num_vertices(),
            self.num_elements(),
            self.boundary.len()
        );
        for v in &self.vertices {
            if self.dim == 1 {
                let _ = writeln!(s, "{:?}", v[0]);
            } else {
                let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
            }
        }
        for el in self.elements() {
            let strs: Vec<String> = el.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", strs.join(" "));
        }
        for f in &self.boundary {
            let _ = writeln!(s, "{} {} {}", f.element, f.local_face, f.tag);
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_ascii())?;
        Ok(())
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn bounding_box(v: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in v {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn parse_one<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {s:?}"),
    })
}

fn parse_fields<T: std::str::FromStr>(line: usize, l: &str) -> Result<Vec<T>> {
    l.split_whitespace().map(|s| parse_one(line, s)).collect()
}

pub fn generate_mesh(spec: &MeshSpec) -> Result<Mesh> {
    match *spec {
        MeshSpec::UnitSquare(n) => unit_square(n),
        MeshSpec::UnitDisk(n) => unit_disk(n),
        MeshSpec::Annulus { r0, r1, n } => annulus(r0, r1, n),
        MeshSpec::Interval { n, random, seed } => interval(n, random, seed),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "mesh resolution N must be >= 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `N` cells on `[0, 1]`; with `random`, interior nodes are shifted by a
/// seeded uniform amount of at most 0.4 h.
pub fn interval(n: usize, random: bool, seed: u64) -> Result<Mesh> {
    check_n(n)?;
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = (0..=n)
        .map(|i| {
            let mut x = i as f64 * h;
            if random && i > 0 && i < n {
                x += rng.gen_range(-0.4..=0.4) * h;
            }
            [x, 0.0]
        })
        .collect();
    let elements = (0..n).flat_map(|i| [i, i + 1]).collect();
    Mesh::new(
        1,
        vertices,
        elements,
        vec![(0, 0, "left".into()), (n - 1, 1, "right".into())],
    )
}

/// Structured `N x N` split of the unit square, diagonals from `(i, j)` to
/// `(i+1, j+1)`.
pub fn unit_square(n: usize) -> Result<Mesh> {
    check_n(n)?;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut elements = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            elements.extend([a, b, c, a, c, d]);
        }
    }
    Mesh::with_tagger(2, vertices, elements, |_, nrm| {
        match (nrm[0].round() as i32, nrm[1].round() as i32) {
            (-1, _) => "left",
            (1, _) => "right",
            (_, -1) => "bottom",
            _ => "top",
        }
        .to_string()
    })
}

/// Unit disk from `N` concentric rings (ring `k` has `6k` vertices);
/// `6 N²` triangles, symmetric under rotation by π.
pub fn unit_disk(n: usize) -> Result<Mesh> {
    check_n(n)?;
    let radii: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let counts: Vec<usize> = (1..=n).map(|k| 6 * k).collect();
    ring_mesh(Some([0.0, 0.0]), &radii, &counts, |_, _| "outer".into())
}

/// Annulus `r0 <= |x| <= r1` with `N` radial layers; ring point counts are
/// even and chosen so that elements are roughly isotropic.
pub fn annulus(r0: f64, r1: f64, n: usize) -> Result<Mesh> {
    check_n(n)?;
    if !(r0 > 0.0 && r1 > r0) {
        return Err(Error::InvalidParameter(format!(
            "annulus needs 0 < r0 < r1, got r0 = {r0}, r1 = {r1}"
        )));
    }
    let dr = (r1 - r0) / n as f64;
    let radii: Vec<f64> = (0..=n).map(|k| r0 + k as f64 * dr).collect();
    let counts: Vec<usize> = radii
        .iter()
        .map(|r| {
            let c = (2.0 * PI * r / dr / 2.0).round() as usize * 2;
            c.max(6)
        })
        .collect();
    let mid = 0.5 * (r0 + r1);
    ring_mesh(None, &radii, &counts, move |p, _| {
        if p[0].hypot(p[1]) < mid {
            "inner".into()
        } else {
            "outer".into()
        }
    })
}

// Concentric rings, each with an even number of points starting at angle 0.
// Consecutive rings are stitched by merging angles over the upper half and the
// result is copied rotated by π, which makes the mesh centrally symmetric.
fn ring_mesh(
    center: Option<[f64; 2]>,
    radii: &[f64],
    counts: &[usize],
    tagger: impl Fn([f64; 2], [f64; 2]) -> String,
) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut starts = Vec::new();
    if let Some(c) = center {
        vertices.push(c);
    }
    for (&r, &m) in radii.iter().zip(counts) {
        debug_assert!(m % 2 == 0);
        starts.push(vertices.len());
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
        }
    }
    let mut elements = Vec::new();
    if center.is_some() {
        let m = counts[0];
        for j in 0..m {
            elements.extend([0, starts[0] + j, starts[0] + (j + 1) % m]);
        }
    }
    for k in 1..radii.len() {
        let (mi, mo) = (counts[k - 1], counts[k]);
        let (si, so) = (starts[k - 1], starts[k]);
        let angle = |j: usize, m: usize| j as f64 / m as f64;
        let mut half = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < mi / 2 || j < mo / 2 {
            let advance_inner = j == mo / 2 || (i < mi / 2 && angle(i + 1, mi) < angle(j + 1, mo));
            if advance_inner {
                half.push([(si, i), (so, j), (si, i + 1)]);
                i += 1;
            } else {
                half.push([(si, i), (so, j), (so, j + 1)]);
                j += 1;
            }
        }
        for shift in [0, 1] {
            for tri in &half {
                for &(s, idx) in tri {
                    let m = if s == si { mi } else { mo };
                    elements.push(s + (idx + shift * m / 2) % m);
                }
            }
        }
    }
    Mesh::with_tagger(2, vertices, elements, tagger)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF_TRIANGLE: &str =
        "# reference triangle\n2 3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 0 bottom\n0 1 hyp\n0 2 left\n";

    #[test]
    fn reference_triangle_normals() {
        let m = Mesh::parse(REF_TRIANGLE).unwrap();
        assert_eq!(m.num_elements(), 1);
        let n: Vec<[f64; 2]> = m.boundary_faces().iter().map(|f| f.normal).collect();
        let s = 1.0 / 2f64.sqrt();
        let expected = [[0.0, -1.0], [s, s], [-1.0, 0.0]];
        for (a, b) in n.iter().zip(expected) {
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
        assert_eq!(m.boundary_faces()[1].tag, "hyp");
    }

    #[test]
    fn interval_file() {
        let m = Mesh::parse("1 3 2 2\n0\n0.5\n1\n0 1\n1 2\n0 0 left\n1 1 right\n").unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.boundary_faces()[0].normal, [-1.0, 0.0]);
        assert_eq!(m.boundary_faces()[1].normal, [1.0, 0.0]);
    }

    #[test]
    fn parse_errors_report_line() {
        let err = Mesh::parse("2 3 1 3\n0 0\n1 x\n0 1\n0 1 2\n0 0 a\n0 1 a\n0 2 a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn degenerate_and_inverted_rejected() {
        let flat = "2 3 1 3\n0 0\n1 0\n2 0\n0 1 2\n0 0 a\n0 1 a\n0 2 a\n";
        assert!(matches!(
            Mesh::parse(flat),
            Err(Error::DegenerateElement { .. })
        ));
        let cw = "2 3 1 3\n0 0\n0 1\n1 0\n0 1 2\n0 0 a\n0 1 a\n0 2 a\n";
        assert!(matches!(
            Mesh::parse(cw),
            Err(Error::DegenerateElement { .. })
        ));
    }

    #[test]
    fn missing_boundary_face_rejected() {
        let t = "2 3 1 2\n0 0\n1 0\n0 1\n0 1 2\n0 0 a\n0 1 a\n";
        assert!(matches!(Mesh::parse(t), Err(Error::NonConforming(_))));
    }

    #[test]
    fn hanging_node_rejected() {
        // big triangle (0,0),(2,0),(0,2) next to two small ones splitting edge
        // (2,0)-(0,2) at (1,1)
        let v = vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [1.0, 1.0], [2.0, 2.0]];
        let e = vec![0, 1, 2, 1, 4, 3, 3, 4, 2];
        let r = Mesh::with_tagger(2, v, e, |_, _| "b".into());
        assert!(matches!(r, Err(Error::NonConforming(_))), "{r:?}");
    }

    #[test]
    fn regular_interval() {
        let m = interval(2, false, 0).unwrap();
        let xs: Vec<f64> = m.vertices().iter().map(|v| v[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn random_interval_is_monotone_and_seeded() {
        let a = interval(100, true, 7).unwrap();
        let b = interval(100, true, 7).unwrap();
        let c = interval(100, true, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.min_element_size() >= 0.2 / 100.0 - 1e-15);
        assert_eq!(a.vertices()[100][0], 1.0);
    }

    #[test]
    fn unit_square_counts_and_boundary() {
        let m = unit_square(16).unwrap();
        assert_eq!(m.num_elements(), 512);
        assert_eq!(m.num_vertices(), 289);
        assert!((m.boundary_measure() - 4.0).abs() < 1e-12);
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
        for tag in ["left", "right", "top", "bottom"] {
            assert_eq!(
                m.boundary_faces().iter().filter(|f| f.tag == tag).count(),
                16
            );
        }
    }

    #[test]
    fn disk_counts_and_circle() {
        let m = unit_disk(13).unwrap();
        assert_eq!(m.num_elements(), 6 * 169);
        for f in m.boundary_faces() {
            for v in m.face_vertices(f.element, f.local_face) {
                let p = m.vertices()[v];
                assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
            }
        }
        // polygonal boundary: perimeter deficit 2π - 78 sin(π/78)·2
        let deficit = 2.0 * PI - m.boundary_measure();
        assert!(deficit > 0.0 && deficit < 2e-3, "{deficit}");
    }

    #[test]
    fn annulus_boundary_on_circles() {
        let m = annulus(0.5, 1.0, 5).unwrap();
        assert!(m.num_elements() >= 400);
        for f in m.boundary_faces() {
            let r_target = if f.tag == "inner" { 0.5 } else { 1.0 };
            for v in m.face_vertices(f.element, f.local_face) {
                let p = m.vertices()[v];
                assert!((p[0].hypot(p[1]) - r_target).abs() < 1e-12);
            }
        }
        assert!(annulus(1.0, 0.5, 3).is_err());
    }

    #[test]
    fn round_trip_through_ascii() {
        for m in [
            unit_square(5).unwrap(),
            unit_disk(4).unwrap(),
            interval(9, true, 3).unwrap(),
        ] {
            let back = Mesh::parse(&m.to_ascii()).unwrap();
            assert_eq!(back, m);
        }
    }
}
