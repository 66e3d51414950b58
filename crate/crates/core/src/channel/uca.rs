//! Discrete uniform-circular-array model `Λ = R_ψᴴ G_EM T_φ`.
//!
//! Element `k` of a K-element array sits at angle `2πk/K`. The mode matrices
//! use the element-sum normalization `1/√K` and carry no arc-length weight,
//! so for `K = V = Q` the result equals the continuous coupling matrix times
//! the constant `Q / (2π√(R_s R_r))`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::aperture::{ring_nodes, OamModeSet};
use crate::em::FreeSpace;
use crate::error::{invalid, Result};

use super::{analysis_matrix, projected_green_matrix, sandwich, synthesis_matrix, LinkGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    /// K×N transmit mode matrix.
    pub t_phi: DMatrix<Complex64>,
    /// V×K projected Green samples between array elements.
    pub g_em: DMatrix<Complex64>,
    /// M×V receive mode matrix.
    pub r_psi_h: DMatrix<Complex64>,
    /// M×N mode-domain channel.
    pub lambda: DMatrix<Complex64>,
    pub tx_elements: usize,
    pub rx_elements: usize,
    pub tx_modes: OamModeSet,
    pub rx_modes: OamModeSet,
    /// Two modes of a set are indistinguishable on its array (equal modulo
    /// the element count).
    pub aliasing: bool,
}

impl DiscreteModel {
    pub fn diagonal(&self) -> Vec<Complex64> {
        let n = self.lambda.nrows().min(self.lambda.ncols());
        (0..n).map(|i| self.lambda[(i, i)]).collect()
    }

    pub fn mode_gains(&self) -> Vec<f64> {
        self.diagonal().iter().map(|h| h.norm_sqr()).collect()
    }
}

fn aliased(modes: &OamModeSet, elements: usize) -> bool {
    let mut seen = vec![false; elements];
    modes.iter().any(|l| {
        let slot = l.rem_euclid(elements as i32) as usize;
        std::mem::replace(&mut seen[slot], true)
    })
}

/// UCA with `tx_elements` transmit and `rx_elements` receive elements on the
/// rings of `geom` (its quadrature settings are ignored).
pub fn discrete_uca_model(
    geom: &LinkGeometry,
    tx_elements: usize,
    rx_elements: usize,
    tx_modes: &OamModeSet,
    rx_modes: &OamModeSet,
) -> Result<DiscreteModel> {
    if tx_elements == 0 {
        return Err(invalid("tx_elements", "need at least one element"));
    }
    if rx_elements == 0 {
        return Err(invalid("rx_elements", "need at least one element"));
    }
    let tx = ring_nodes(geom.tx.radius(), 0.0, geom.tx.polarization(), tx_elements);
    let rx = ring_nodes(geom.rx.radius(), geom.distance(), geom.rx.polarization(), rx_elements);
    let g_em = projected_green_matrix(&FreeSpace::new(geom.ctx), &rx, &tx)?;
    let t_phi = synthesis_matrix(&tx, tx_modes, &vec![1.0; tx_elements], 1.0 / (tx_elements as f64).sqrt());
    let r_psi_h = analysis_matrix(&rx, rx_modes, &vec![1.0; rx_elements], 1.0 / (rx_elements as f64).sqrt());
    let lambda = sandwich(&r_psi_h, &g_em, &t_phi);
    Ok(DiscreteModel {
        t_phi,
        g_em,
        r_psi_h,
        lambda,
        tx_elements,
        rx_elements,
        tx_modes: tx_modes.clone(),
        rx_modes: rx_modes.clone(),
        aliasing: aliased(tx_modes, tx_elements) || aliased(rx_modes, rx_elements),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aperture::Polarization;
    use crate::channel::coupling_matrix;
    use crate::em::{projected_green, WaveContext};
    use std::f64::consts::PI;

    fn geometry(q: usize) -> LinkGeometry {
        let ctx = WaveContext::new(5.8e9).unwrap();
        let l = ctx.wavelength();
        LinkGeometry::coaxial(ctx, 2.0 * l, 3.0 * l, 15.0 * l, Polarization::Azimuthal, q).unwrap()
    }

    #[test]
    fn single_element_pair() {
        let g = geometry(64);
        let modes = OamModeSet::centered(1).unwrap();
        let model = discrete_uca_model(&g, 1, 1, &modes, &modes).unwrap();
        let s = g.tx.point_at(0.0);
        let r = g.rx.point_at(0.0);
        let direct = projected_green(&g.ctx, &r, &s, &g.rx.direction_at(0.0), &g.tx.direction_at(0.0)).unwrap();
        assert!((model.lambda[(0, 0)] - direct).norm() < 1e-12 * direct.norm());
        assert!(!model.aliasing);
    }

    #[test]
    fn aliasing_flag() {
        let g = geometry(64);
        let modes = OamModeSet::new(vec![-2, -1, 0, 1]).unwrap();
        assert!(!discrete_uca_model(&g, 4, 4, &modes, &modes).unwrap().aliasing);
        assert!(discrete_uca_model(&g, 3, 3, &modes, &modes).unwrap().aliasing);
        let wide = OamModeSet::new(vec![-2, 2]).unwrap();
        assert!(discrete_uca_model(&g, 4, 4, &wide, &wide).unwrap().aliasing);
        assert!(!discrete_uca_model(&g, 5, 5, &wide, &wide).unwrap().aliasing);
        assert!(discrete_uca_model(&g, 0, 4, &modes, &modes).is_err());
    }

    #[test]
    fn matches_continuous_up_to_constant() {
        let q = 96;
        let g = geometry(q);
        let modes = OamModeSet::centered(7).unwrap();
        let h = coupling_matrix(&g, &modes, &modes).unwrap();
        let model = discrete_uca_model(&g, q, q, &modes, &modes).unwrap();
        let expected = q as f64 / (2.0 * PI * (g.tx.radius() * g.rx.radius()).sqrt());
        for i in 0..modes.len() {
            let ratio = model.lambda[(i, i)] / h.entry(i, i);
            assert!((ratio - expected).norm() < 1e-10 * expected, "mode {i}: {ratio}");
        }
    }

    #[test]
    fn factors_reproduce_lambda() {
        let g = geometry(64);
        let tx = OamModeSet::centered(3).unwrap();
        let rx = OamModeSet::centered(5).unwrap();
        let model = discrete_uca_model(&g, 12, 10, &tx, &rx).unwrap();
        assert_eq!(model.t_phi.shape(), (12, 3));
        assert_eq!(model.g_em.shape(), (10, 12));
        assert_eq!(model.r_psi_h.shape(), (5, 10));
        let product = &model.r_psi_h * &model.g_em * &model.t_phi;
        assert!((product - &model.lambda).norm() < 1e-12 * model.lambda.norm());
    }
}
