use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::Triangulation;
use crate::Error;

/// Write a mesh as plain text: a `nodes N elements P edges S` header, `N` lines `x y boundary`,
/// `P` lines of vertex indices and `S` lines of edge vertex pairs.
pub fn write_mesh<W: Write>(mesh: &Triangulation, mut out: W) -> Result<(), Error> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "nodes {} elements {} edges {}",
        mesh.num_nodes(),
        mesh.num_elements(),
        mesh.num_edges()
    );
    for (p, b) in mesh.coords().iter().zip(mesh.boundary_nodes()) {
        let _ = writeln!(s, "{:e} {:e} {}", p[0], p[1], u8::from(*b));
    }
    for el in mesh.elements() {
        let _ = writeln!(s, "{} {} {}", el[0], el[1], el[2]);
    }
    for ed in mesh.edges() {
        let _ = writeln!(s, "{} {}", ed[0], ed[1]);
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Read a mesh written by [`write_mesh`]. Edge data is rebuilt from the elements;
/// the edge block is optional.
pub fn read_mesh<R: BufRead>(input: R) -> Result<Triangulation, Error> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))??;
    let h: Vec<&str> = header.split_whitespace().collect();
    let count = |key: &str| -> Result<usize, Error> {
        h.iter()
            .position(|w| *w == key)
            .and_then(|i| h.get(i + 1))
            .ok_or_else(|| Error::Parse(format!("missing `{key}` in header")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad `{key}` count")))
    };
    let (nn, ne) = (count("nodes")?, count("elements")?);
    let mut coords = Vec::with_capacity(nn);
    for i in 0..nn {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing node {i}")))??;
        let v: Vec<f64> = line
            .split_whitespace()
            .take(2)
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad node line {i}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != 2 {
            return Err(Error::Parse(format!("bad node line {i}")));
        }
        coords.push([v[0], v[1]]);
    }
    let mut elements = Vec::with_capacity(ne);
    for i in 0..ne {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing element {i}")))??;
        let v: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad element line {i}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != 3 {
            return Err(Error::Parse(format!("bad element line {i}")));
        }
        elements.push([v[0], v[1], v[2]]);
    }
    Triangulation::new(coords, elements)
}
