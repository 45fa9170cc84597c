use rand::Rng;

use crate::error::{Error, Result};
use crate::weight::{parse_expr, VarKind, WeightExpr};
use crate::{seed, C64};

/// Geometric shape hint; polydisks admit exact-boundary polar rules.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polydisk { centers: Vec<C64>, radii: Vec<f64> },
    General,
}

/// A bounded domain `{rho(z, t) < 0}` in `C^n`, possibly varying with the
/// parameters `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    n: usize,
    defining_fn: WeightExpr,
    bounding_box: Vec<(f64, f64)>,
    shape: Shape,
}

fn complex_literal(c: C64) -> String {
    match (c.re, c.im) {
        (re, 0.0) if re >= 0.0 => format!("{re:?}"),
        (re, im) => {
            let re_part = if re < 0.0 {
                format!("-{:?}", -re)
            } else {
                format!("{re:?}")
            };
            let im_part = if im < 0.0 {
                format!(" - {:?} * i", -im)
            } else {
                format!(" + {im:?} * i")
            };
            format!("({re_part}{im_part})")
        }
    }
}

impl Domain {
    /// Domain from a defining function. `bounding_box` lists `(lo, hi)` for
    /// `re z_1, im z_1, re z_2, ...` and must contain every fiber `{rho < 0}`.
    pub fn new(n: usize, defining_fn: WeightExpr, bounding_box: Vec<(f64, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("domain dimension must be at least 1"));
        }
        if bounding_box.len() != 2 * n {
            return Err(Error::invalid(format!(
                "bounding box needs {} intervals",
                2 * n
            )));
        }
        if bounding_box
            .iter()
            .any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::invalid(
                "bounding box intervals must be finite with lo < hi",
            ));
        }
        if defining_fn.z_arity() > n {
            return Err(Error::invalid(format!(
                "defining function uses z{} but n = {n}",
                defining_fn.z_arity()
            )));
        }
        Ok(Self {
            n,
            defining_fn,
            bounding_box,
            shape: Shape::General,
        })
    }

    /// Product of disks `|z_j - c_j| < r_j`.
    pub fn polydisk(centers: Vec<C64>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::invalid("polydisk needs one center per radius"));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::invalid("polydisk radii must be positive"));
        }
        let terms: Vec<String> = centers
            .iter()
            .zip(&radii)
            .enumerate()
            .map(|(j, (c, r))| {
                let var = if *c == C64::new(0.0, 0.0) {
                    format!("z{}", j + 1)
                } else {
                    format!("z{} - {}", j + 1, complex_literal(*c))
                };
                format!("abs2({var}) - {:?}", r * r)
            })
            .collect();
        let src = if terms.len() == 1 {
            terms[0].clone()
        } else {
            format!("max({})", terms.join(", "))
        };
        let defining_fn = parse_expr(&src)?;
        let bounding_box = centers
            .iter()
            .zip(&radii)
            .flat_map(|(c, r)| [(c.re - r, c.re + r), (c.im - r, c.im + r)])
            .collect();
        Ok(Self {
            n: centers.len(),
            defining_fn,
            bounding_box,
            shape: Shape::Polydisk { centers, radii },
        })
    }

    /// Unit disk in `C`.
    pub fn unit_disk() -> Self {
        Self::polydisk(vec![C64::new(0.0, 0.0)], vec![1.0]).expect("unit disk")
    }

    /// Disk of radius `r` about the origin.
    pub fn disk(r: f64) -> Result<Self> {
        Self::polydisk(vec![C64::new(0.0, 0.0)], vec![r])
    }

    /// The slice `{z_n = c}` as a domain in `C^{n-1}`.
    pub fn slice_last(&self, c: C64) -> Result<Domain> {
        if self.n < 2 {
            return Err(Error::invalid("slicing needs n >= 2"));
        }
        if let Shape::Polydisk { centers, radii } = &self.shape {
            if (c - centers[self.n - 1]).norm() >= radii[self.n - 1] {
                return Err(Error::EmptyDomain);
            }
            return Domain::polydisk(centers[..self.n - 1].to_vec(), radii[..self.n - 1].to_vec());
        }
        let rho = self.defining_fn.substitute(VarKind::Z, self.n, c);
        Domain::new(
            self.n - 1,
            rho,
            self.bounding_box[..2 * (self.n - 1)].to_vec(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn defining_fn(&self) -> &WeightExpr {
        &self.defining_fn
    }

    pub fn bounding_box(&self) -> &[(f64, f64)] {
        &self.bounding_box
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn depends_on_t(&self) -> bool {
        self.defining_fn.depends_on_t()
    }

    pub fn box_volume(&self) -> f64 {
        self.bounding_box.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Value of the defining function.
    pub fn rho(&self, z: &[C64], t: &[C64]) -> f64 {
        self.defining_fn.eval_bound(z, t)
    }

    pub fn contains(&self, z: &[C64], t: &[C64]) -> bool {
        self.rho(z, t) < 0.0
    }

    /// Check that the fiber at `t` stays inside the bounding box by sampling a
    /// box enlarged by 10% on every side.
    pub fn validate_at(&self, t: &[C64]) -> Result<()> {
        self.defining_fn.check_bound(self.n, t.len())?;
        let mut rng = seed::rng(0, "domain-validation");
        let m = 2 * self.n;
        let mut x = vec![0.0; m];
        let samples = 4096usize.min(512 * m);
        for _ in 0..samples {
            let mut outside = false;
            for (a, &(lo, hi)) in self.bounding_box.iter().enumerate() {
                let pad = 0.1 * (hi - lo);
                x[a] = rng.random_range((lo - pad)..(hi + pad));
                outside |= x[a] < lo || x[a] > hi;
            }
            if !outside {
                continue;
            }
            let z: Vec<C64> = x.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            if self.contains(&z, t) {
                return Err(Error::DomainOutsideBox {
                    point: format!("{z:?}"),
                });
            }
        }
        Ok(())
    }
}
