use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Domain, Point};

/// Seeded, reproducible source of sample points and point tuples.
///
/// Every tuple stream is half grid, half random. Grid tuples come from a
/// full lattice over `grid_density` nodes per axis when that fits in the
/// budget, otherwise from an additive-recurrence sequence snapped to the
/// same nodes, so boundary nodes always appear. Random tuples are uniform
/// over the sampling box.
#[derive(Clone, Debug)]
pub struct Sampler {
    seed: u64,
    region: Domain,
    grid_density: usize,
    random_count: usize,
    margin: f64,
}

pub const DEFAULT_BUDGET: usize = 10_000;
pub const DEFAULT_GRID_DENSITY: usize = 51;
pub const DEFAULT_MARGIN: f64 = 1e-6;

impl Sampler {
    pub fn new(seed: u64, region: Domain) -> Self {
        Sampler {
            seed,
            region,
            grid_density: DEFAULT_GRID_DENSITY,
            random_count: DEFAULT_BUDGET / 2,
            margin: DEFAULT_MARGIN,
        }
    }

    /// Sets the total number of tuples per stream (split evenly grid/random).
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.random_count = budget.div_ceil(2);
        self
    }

    pub fn with_grid_density(mut self, density: usize) -> Self {
        self.grid_density = density.max(2);
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn region(&self) -> &Domain {
        &self.region
    }

    pub fn grid_density(&self) -> usize {
        self.grid_density
    }

    pub fn random_count(&self) -> usize {
        self.random_count
    }

    pub fn budget(&self) -> usize {
        2 * self.random_count
    }

    /// Grid nodes along one axis, endpoints included (shrunk on open ends).
    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        let (lo, hi) = self.region.axes()[axis].sampling_range(self.margin);
        let n = self.grid_density;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * (k as f64) / ((n - 1) as f64)
                }
            })
            .collect()
    }

    /// Evenly spaced points over the region: `count` nodes per axis,
    /// endpoints included. Used for grid scans, not for axiom sampling.
    pub fn uniform_grid(&self, count: usize) -> Vec<Point> {
        let count = count.max(2);
        let axes: Vec<Vec<f64>> = self
            .region
            .axes()
            .iter()
            .map(|iv| {
                let (lo, hi) = iv.sampling_range(self.margin);
                (0..count)
                    .map(|k| {
                        if k == count - 1 {
                            hi
                        } else {
                            lo + (hi - lo) * (k as f64) / ((count - 1) as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        let total = count.pow(axes.len() as u32);
        (0..total)
            .map(|mut idx| {
                let coords = axes
                    .iter()
                    .map(|nodes| {
                        let c = nodes[idx % count];
                        idx /= count;
                        c
                    })
                    .collect();
                Point::from_coords_unchecked(coords)
            })
            .collect()
    }

    /// Single points: the arity-1 tuple stream flattened.
    pub fn points(&self) -> Vec<Point> {
        self.tuples(1).into_iter().flatten().collect()
    }

    pub fn pairs(&self) -> Vec<(Point, Point)> {
        self.tuples(2)
            .into_iter()
            .map(|mut t| {
                let y = t.pop().expect("arity 2");
                let x = t.pop().expect("arity 2");
                (x, y)
            })
            .collect()
    }

    /// Tuples of `arity` points; grid tuples first, then random ones.
    pub fn tuples(&self, arity: usize) -> Vec<Vec<Point>> {
        let mut out = self.grid_tuples(arity);
        out.extend(self.random_tuples(arity));
        out
    }

    fn grid_tuples(&self, arity: usize) -> Vec<Vec<Point>> {
        let d = self.region.dim();
        let nodes: Vec<Vec<f64>> = (0..d).map(|a| self.axis_nodes(a)).collect();
        let components = arity * d;
        let density = self.grid_density;
        let wanted = self.random_count;

        let lattice_size = (0..components).try_fold(1usize, |acc, _| acc.checked_mul(density));
        let index_rows: Vec<Vec<usize>> = match lattice_size {
            Some(total) if total <= wanted => (0..total)
                .map(|mut idx| {
                    (0..components)
                        .map(|_| {
                            let k = idx % density;
                            idx /= density;
                            k
                        })
                        .collect()
                })
                .collect(),
            _ => {
                let alphas = additive_recurrence(components);
                (0..wanted)
                    .map(|i| {
                        alphas
                            .iter()
                            .map(|a| {
                                let u = (0.5 + (i as f64 + 1.0) * a).fract();
                                ((u * density as f64) as usize).min(density - 1)
                            })
                            .collect()
                    })
                    .collect()
            }
        };

        index_rows
            .into_iter()
            .map(|row| {
                row.chunks(d)
                    .map(|chunk| {
                        let coords = chunk
                            .iter()
                            .enumerate()
                            .map(|(axis, &k)| nodes[axis][k])
                            .collect();
                        Point::from_coords_unchecked(coords)
                    })
                    .collect()
            })
            .collect()
    }

    fn random_tuples(&self, arity: usize) -> Vec<Vec<Point>> {
        let salt = (arity as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt);
        let ranges: Vec<(f64, f64)> = self
            .region
            .axes()
            .iter()
            .map(|iv| iv.sampling_range(self.margin))
            .collect();
        (0..self.random_count)
            .map(|_| {
                (0..arity)
                    .map(|_| {
                        let coords = ranges
                            .iter()
                            .map(|&(lo, hi)| {
                                if hi > lo {
                                    rng.random_range(lo..=hi)
                                } else {
                                    lo
                                }
                            })
                            .collect();
                        Point::from_coords_unchecked(coords)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Irrational step vector of the R_d low-discrepancy sequence.
fn additive_recurrence(dim: usize) -> Vec<f64> {
    // Positive root of x^(d+1) = x + 1.
    let mut phi = 2.0_f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    (1..=dim).map(|k| phi.powi(-(k as i32)).fract()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = Sampler::new(7, Domain::unit()).with_budget(200);
        let b = Sampler::new(7, Domain::unit()).with_budget(200);
        assert_eq!(a.tuples(3), b.tuples(3));
        let c = Sampler::new(8, Domain::unit()).with_budget(200);
        assert_ne!(a.tuples(3), c.tuples(3));
    }

    #[test]
    fn lattice_includes_corners() {
        let s = Sampler::new(0, Domain::unit()).with_budget(10_000);
        let pairs = s.pairs();
        assert!(pairs.iter().any(|(x, y)| x.x() == 0.0 && y.x() == 1.0));
        assert_eq!(pairs.len(), 51 * 51 + 5000);
    }

    #[test]
    fn open_domain_samples_stay_inside() {
        let d = Domain::open(0.0, 1.0).unwrap();
        let s = Sampler::new(3, d.clone()).with_budget(2000);
        assert!(s.tuples(3).iter().flatten().all(|p| d.contains(p)));
        let grid = s.uniform_grid(1000);
        assert_eq!(grid.len(), 1000);
        assert!(grid.iter().all(|p| d.contains(p)));
    }

    #[test]
    fn recurrence_tuples_fill_budget() {
        let s = Sampler::new(1, Domain::unit()).with_budget(1000);
        // 51^3 lattice exceeds 500 grid tuples.
        assert_eq!(s.tuples(3).len(), 1000);
    }
}
