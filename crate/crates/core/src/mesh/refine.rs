use std::collections::HashMap;

use super::Triangulation;

/// Uniform red refinement: every element is split into four similar children.
///
/// Child `[v0, m2, m1]`, `[m2, v1, m0]`, `[m1, m0, v2]` and the centre child
/// `[m0, m1, m2]`, where `m_j` is the midpoint of the edge opposite `v_j`.
pub fn refine_red(mesh: &Triangulation) -> Triangulation {
    let nn = mesh.num_nodes();
    let mut coords = mesh.coords().to_vec();
    coords.extend((0..mesh.num_edges()).map(|s| mesh.edge_midpoint(s)));
    let mut elements = Vec::with_capacity(4 * mesh.num_elements());
    for (el, ee) in mesh.elements().iter().zip(mesh.element_edges()) {
        let [v0, v1, v2] = *el;
        let [m0, m1, m2] = ee.map(|s| nn + s);
        elements.extend([[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]]);
    }
    Triangulation::new(coords, elements).expect("red refinement preserves validity")
}

/// Newest-vertex bisection of all elements with a marked edge, plus the closure needed
/// for conformity. The refinement edge of an element is the edge opposite local vertex 0.
pub fn refine_bisect(mesh: &Triangulation, marked_edges: &[bool]) -> Triangulation {
    assert_eq!(marked_edges.len(), mesh.num_edges());
    let mut marked = marked_edges.to_vec();
    loop {
        let mut changed = false;
        for ee in mesh.element_edges() {
            if !marked[ee[0]] && (marked[ee[1]] || marked[ee[2]]) {
                marked[ee[0]] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut coords = mesh.coords().to_vec();
    let mut midpoint: HashMap<[usize; 2], usize> = HashMap::new();
    for (s, &m) in marked.iter().enumerate() {
        if m {
            midpoint.insert(mesh.edges()[s], coords.len());
            coords.push(mesh.edge_midpoint(s));
        }
    }
    let mut elements = Vec::with_capacity(mesh.num_elements() * 2);
    for el in mesh.elements() {
        bisect(*el, &midpoint, &mut elements);
    }
    Triangulation::new(coords, elements).expect("bisection preserves validity")
}

fn bisect(el: [usize; 3], midpoint: &HashMap<[usize; 2], usize>, out: &mut Vec<[usize; 3]>) {
    let [v0, v1, v2] = el;
    match midpoint.get(&[v1.min(v2), v1.max(v2)]) {
        Some(&m) => {
            bisect([m, v0, v1], midpoint, out);
            bisect([m, v2, v0], midpoint, out);
        }
        None => out.push(el),
    }
}

/// Squared refinement indicator `|mid T|^(-2) |T|^(5/7)` grading the mesh towards the origin.
pub fn grading_indicator(mesh: &Triangulation) -> Vec<f64> {
    grading_indicator_with(mesh, 5.0 / 7.0)
}

/// `|mid T|^-2 |T|^area_power`.
pub fn grading_indicator_with(mesh: &Triangulation, area_power: f64) -> Vec<f64> {
    (0..mesh.num_elements())
        .map(|e| {
            let c = mesh.barycenter(e);
            let r2 = c[0] * c[0] + c[1] * c[1];
            mesh.area(e).powf(area_power) / r2
        })
        .collect()
}

/// Minimal set of indices whose indicators sum to at least `theta` times the total,
/// chosen greedily by descending value with ties broken by lower index.
pub fn dorfler_mark(eta2: &[f64], theta: f64) -> Vec<usize> {
    assert!((0.0..=1.0).contains(&theta), "bulk parameter must lie in [0, 1]");
    let mut order: Vec<usize> = (0..eta2.len()).collect();
    order.sort_by(|&a, &b| eta2[b].total_cmp(&eta2[a]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&i| eta2[i]).sum();
    let goal = theta * total;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for i in order {
        if acc >= goal && !out.is_empty() {
            break;
        }
        acc += eta2[i];
        out.push(i);
    }
    if theta == 0.0 {
        out.clear();
    }
    out.sort_unstable();
    out
}
