//! Direct stiffness summation on conforming GLL element meshes.

use super::mesh::Mesh2D;

/// Local-to-global map for the GLL grid. Global numbering is row-major over
/// the global node lattice; summation visits local entries in ascending
/// element order so results are bitwise reproducible.
#[derive(Debug, Clone)]
pub struct GatherScatter {
    local_to_global: Vec<usize>,
    global_len: usize,
    multiplicity: Vec<f64>,
}

impl GatherScatter {
    pub fn new(mesh: &Mesh2D, order: usize) -> Self {
        let n1 = order + 1;
        let lattice = |axis: usize, count: usize| {
            if mesh.periodic[axis] {
                count * order
            } else {
                count * order + 1
            }
        };
        let gx_len = lattice(0, mesh.elements_x);
        let gy_len = lattice(1, mesh.elements_y);
        let mut local_to_global = Vec::with_capacity(mesh.num_elements() * n1 * n1);
        for e in 0..mesh.num_elements() {
            let (ix, iy) = mesh.element_coords(e);
            for j in 0..n1 {
                let gy = (iy * order + j) % gy_len;
                for i in 0..n1 {
                    let gx = (ix * order + i) % gx_len;
                    local_to_global.push(gy * gx_len + gx);
                }
            }
        }
        let global_len = gx_len * gy_len;
        let mut counts = vec![0.0; global_len];
        for &g in &local_to_global {
            counts[g] += 1.0;
        }
        let multiplicity = local_to_global.iter().map(|&g| counts[g]).collect();
        Self { local_to_global, global_len, multiplicity }
    }

    pub fn local_len(&self) -> usize {
        self.local_to_global.len()
    }

    pub fn global_len(&self) -> usize {
        self.global_len
    }

    pub fn local_to_global(&self) -> &[usize] {
        &self.local_to_global
    }

    /// Number of elements sharing each local node.
    pub fn multiplicity(&self) -> &[f64] {
        &self.multiplicity
    }

    /// Sums local contributions into global nodes.
    pub fn gather(&self, local: &[f64]) -> Vec<f64> {
        let mut global = vec![0.0; self.global_len];
        for (&g, &v) in self.local_to_global.iter().zip(local) {
            global[g] += v;
        }
        global
    }

    /// Copies global values back to every local copy.
    pub fn scatter(&self, global: &[f64], local: &mut [f64]) {
        for (l, &g) in local.iter_mut().zip(&self.local_to_global) {
            *l = global[g];
        }
    }

    /// In-place direct stiffness summation: every shared node receives the
    /// sum over all elements that hold it.
    pub fn dssum(&self, local: &mut [f64]) {
        let global = self.gather(local);
        self.scatter(&global, local);
    }

    /// Inner product of two continuous fields counting each global node once.
    pub fn global_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.multiplicity)
            .map(|((x, y), m)| x * y / m)
            .sum()
    }
}
