use crate::error::Result;
use crate::numkit::{ComplexMat, C64};

use super::{Pairing, ParamHamiltonian, ParamPoint};

/// Time-reversed blocks of the BHZ matrix when `B_g = 0`: rows `{0, 2}` and `{1, 3}`.
pub const BHZ_PAIRING: Pairing = Pairing([[0, 2], [1, 3]]);

/// Material parameters, all in rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhzParams {
    pub hxy: f64,
    pub hz: f64,
    pub m: f64,
    pub bg: f64,
}

/// `(B_x, B_y, B_z)` at momentum `(kx, ky)`.
pub fn bhz_fields(kx: f64, ky: f64, p: &BhzParams) -> (f64, f64, f64) {
    (p.hxy * kx.sin(), p.hxy * ky.sin(), p.m - 2.0 * p.hz * (2.0 - kx.cos() - ky.cos()))
}

fn bhz_matrix(bx: f64, by: f64, bz: f64, bg: f64) -> ComplexMat {
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    ComplexMat::from_rows(&[
        vec![r(bz), z, C64::new(bx, -by), r(bg)],
        vec![z, r(bz), r(bg), C64::new(-bx, -by)],
        vec![C64::new(bx, by), r(bg), r(-bz), z],
        vec![r(bg), C64::new(-bx, by), z, r(-bz)],
    ])
}

pub fn bhz_hamiltonian(kx: f64, ky: f64, p: &BhzParams) -> ComplexMat {
    let (bx, by, bz) = bhz_fields(kx, ky, p);
    bhz_matrix(bx, by, bz, p.bg)
}

/// The four-band BHZ Hamiltonian over momentum `(kx, ky)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BhzModel {
    pub params: BhzParams,
}

impl BhzModel {
    pub fn new(params: BhzParams) -> Self {
        Self { params }
    }

    pub fn point(kx: f64, ky: f64) -> ParamPoint {
        ParamPoint::from_pairs([("kx", kx), ("ky", ky)])
    }
}

impl ParamHamiltonian for BhzModel {
    fn dim(&self) -> usize {
        4
    }

    fn param_names(&self) -> &[&'static str] {
        &["kx", "ky"]
    }

    fn eval(&self, pt: &ParamPoint) -> Result<ComplexMat> {
        Ok(bhz_hamiltonian(pt.get("kx")?, pt.get("ky")?, &self.params))
    }

    fn analytic_partial(&self, pt: &ParamPoint, mu: &str) -> Option<Result<ComplexMat>> {
        let p = &self.params;
        let k = match pt.get(mu) {
            Ok(k) => k,
            Err(e) => return Some(Err(e)),
        };
        match mu {
            "kx" => Some(Ok(bhz_matrix(p.hxy * k.cos(), 0.0, -2.0 * p.hz * k.sin(), 0.0))),
            "ky" => Some(Ok(bhz_matrix(0.0, p.hxy * k.cos(), -2.0 * p.hz * k.sin(), 0.0))),
            _ => None,
        }
    }
}
