#![allow(dead_code)]

use rand::Rng;

use semiaffine::cells::{intersect, polycenters, Cell};
use semiaffine::grid::Grid;
use semiaffine::{Assignment, LambdaSort, LinearPoly, PadicRational};

pub fn names(k: usize) -> Vec<String> {
    ["x", "y", "z"][..k].iter().map(|s| s.to_string()).collect()
}

fn with_t(sigma: &Assignment, var: &str, t: &PadicRational) -> Assignment {
    let mut s = sigma.clone();
    s.insert(var.to_string(), t.clone());
    s
}

/// Base points: the full grid for at most one variable, a sample otherwise.
pub fn base_points(grid: &Grid, xvars: &[String], count: usize, rng: &mut impl Rng) -> Vec<Assignment> {
    match xvars.len() {
        0 | 1 => grid.points(xvars),
        _ => grid.sample_points(xvars, count, rng),
    }
}

/// Points `(x, t)` with `x` sampled and `t` ranging over the grid around
/// each center evaluated at `x`.
pub fn fibre_points(
    grid: &Grid,
    xvars: &[String],
    var: &str,
    centers: &[LinearPoly],
    xcount: usize,
    rng: &mut impl Rng,
) -> Vec<Assignment> {
    let xs = if xvars.is_empty() {
        vec![Assignment::new()]
    } else {
        grid.sample_points(xvars, xcount, rng)
    };
    let mut out = Vec::new();
    for x in xs {
        let cs: Vec<PadicRational> = centers.iter().map(|c| c.eval(&x).unwrap()).collect();
        for t in grid.around(&cs) {
            out.push(with_t(&x, var, &t));
        }
    }
    out
}

/// Checks that `intersect(c1, c2)` is a disjoint cover of `C1 ∩ C2` on the
/// sampled points. Returns the number of points checked and how many lie in
/// the intersection.
pub fn check_intersect(
    c1: &Cell,
    c2: &Cell,
    grid: &Grid,
    xcount: usize,
    rng: &mut impl Rng,
) -> Result<(usize, usize), String> {
    let cells = intersect(c1, c2).map_err(|e| e.to_string())?;
    let pts = fibre_points(grid, &c1.xvars, &c1.var, &[c1.center.clone(), c2.center.clone()], xcount, rng);
    let mut inside = 0;
    for s in &pts {
        let want = c1.member(s).unwrap() && c2.member(s).unwrap();
        inside += want as usize;
        let hits = cells.iter().filter(|c| c.member(s).unwrap()).count();
        if hits != want as usize {
            return Err(format!(
                "c1 = {:?}\nc2 = {:?}\npoint {:?}: expected {}, {} cells contain it",
                c1.to_record(),
                c2.to_record(),
                s,
                want,
                hits
            ));
        }
    }
    Ok((pts.len(), inside))
}

/// Checks that `polycenters(polys)` partitions the sampled points and that
/// every descriptor reproduces `rho` and `ord` of its polynomial.
pub fn check_polycenters(
    polys: &[LinearPoly],
    xvars: &[String],
    var: &str,
    sort: LambdaSort,
    grid: &Grid,
    xcount: usize,
    rng: &mut impl Rng,
) -> Result<usize, String> {
    let p = sort.p;
    let carriers = polycenters(polys, xvars, var, sort).map_err(|e| e.to_string())?;
    let centers: Vec<LinearPoly> = polys
        .iter()
        .filter_map(|f| f.center_form(var).map(|(_, c)| c))
        .chain([LinearPoly::zero()])
        .collect();
    let pts = fibre_points(grid, xvars, var, &centers, xcount, rng);
    for s in &pts {
        let inside: Vec<_> = carriers.iter().filter(|c| c.cell.member(s).unwrap()).collect();
        if inside.len() != 1 {
            return Err(format!("polys {:?}: point {:?} in {} cells", polys, s, inside.len()));
        }
        let car = inside[0];
        let off = car.cell.offset(s).unwrap();
        let lam = sort.rho(&off);
        for (i, f) in polys.iter().enumerate() {
            let v = f.eval(s).unwrap();
            let got = car.residues[i].eval_at(lam, s, &sort).unwrap();
            if got != sort.rho(&v) {
                return Err(format!(
                    "polys {:?}: residue of {:?} at {:?}: {:?} vs {:?} ({:?})",
                    polys,
                    f,
                    s,
                    got,
                    sort.rho(&v),
                    car.residues[i]
                ));
            }
            let o = car.orders[i].eval(s, &off, p).unwrap();
            if o != v.ord(p) {
                return Err(format!("polys {:?}: order of {:?} at {:?}: {} vs {}", polys, f, s, o, v.ord(p)));
            }
            for (h, set) in &car.pins {
                let r = sort.rho(&h.eval(s).unwrap());
                if !set.contains(&r) {
                    return Err(format!("pin {:?} violated at {:?}", h, s));
                }
            }
        }
    }
    Ok(pts.len())
}
