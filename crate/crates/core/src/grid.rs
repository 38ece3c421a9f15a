//! Sample grids for the brute-force checks: values `±s·p^e` with `s` a
//! unit of at most `digits` base-p digits and `e` in `[−window, window]`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::Assignment;
use crate::padic::{PadicRational, Prime};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub p: Prime,
    pub window: i64,
    pub digits: u32,
}

impl Grid {
    pub fn new(p: Prime, window: i64, digits: u32) -> Grid {
        Grid { p, window, digits }
    }

    /// `±s` for `1 <= s < p^digits`, `p ∤ s`.
    pub fn units(&self) -> Vec<i128> {
        let top = self.p.pow(self.digits) as i128;
        let p = self.p.get() as i128;
        (1..top)
            .filter(|s| s % p != 0)
            .flat_map(|s| [s, -s])
            .collect()
    }

    /// `0` and every `±s·p^e`.
    pub fn offsets(&self) -> Vec<PadicRational> {
        let units = self.units();
        let mut out = vec![PadicRational::zero()];
        for e in -self.window..=self.window {
            let pe = PadicRational::p_pow(self.p.get(), e);
            for &s in &units {
                out.push(&pe * &PadicRational::from_int(s));
            }
        }
        out
    }

    /// `c + v` for every center `c` and offset `v`, sorted and deduplicated.
    pub fn around(&self, centers: &[PadicRational]) -> Vec<PadicRational> {
        let offs = self.offsets();
        let mut out: Vec<PadicRational> = centers
            .iter()
            .flat_map(|c| offs.iter().map(move |v| c + v))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// The full product grid on `vars`.
    pub fn points(&self, vars: &[String]) -> Vec<Assignment> {
        let offs = self.offsets();
        let mut out = vec![Assignment::new()];
        for v in vars {
            out = out
                .into_iter()
                .flat_map(|a| {
                    offs.iter().map(move |x| {
                        let mut b = a.clone();
                        b.insert(v.clone(), x.clone());
                        b
                    })
                })
                .collect();
        }
        out
    }

    /// `count` points drawn from the grid. Every third coordinate is drawn
    /// from a small set of integers so that coincidences between linear
    /// forms are hit often.
    pub fn sample_points(&self, vars: &[String], count: usize, rng: &mut impl Rng) -> Vec<Assignment> {
        let offs = self.offsets();
        let small: Vec<PadicRational> = (-3..=3)
            .map(PadicRational::from_int)
            .chain([PadicRational::p_pow(self.p.get(), 1), PadicRational::p_pow(self.p.get(), -1)])
            .collect();
        (0..count)
            .map(|_| {
                vars.iter()
                    .map(|v| {
                        let x = if rng.gen_ratio(1, 3) {
                            small.choose(rng).unwrap().clone()
                        } else {
                            offs.choose(rng).unwrap().clone()
                        };
                        (v.clone(), x)
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let g = Grid::new(Prime::new(3).unwrap(), 2, 2);
        assert_eq!(g.units().len(), 12);
        assert_eq!(g.offsets().len(), 1 + 5 * 12);
        assert_eq!(g.points(&["x".into(), "y".into()]).len(), 61 * 61);
        let a = g.around(&[PadicRational::zero(), PadicRational::one()]);
        assert!(a.contains(&PadicRational::one()));
    }
}
