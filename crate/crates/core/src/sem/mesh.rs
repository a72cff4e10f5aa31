use crate::error::{Error, Result};

/// Uniform rectangular element mesh on [0, Lx] x [0, Ly].
///
/// Elements are numbered `e = iy * elements_x + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub elements_x: usize,
    pub elements_y: usize,
    pub length_x: f64,
    pub length_y: f64,
    pub periodic: [bool; 2],
}

/// Offsets of the eight neighbors: four faces first, then four corners.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] =
    [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, -1), (-1, 1), (1, 1)];

impl Mesh2D {
    /// Fully periodic mesh.
    pub fn periodic(elements_x: usize, elements_y: usize, length_x: f64, length_y: f64) -> Result<Self> {
        Self::new(elements_x, elements_y, length_x, length_y, [true, true])
    }

    pub fn new(
        elements_x: usize,
        elements_y: usize,
        length_x: f64,
        length_y: f64,
        periodic: [bool; 2],
    ) -> Result<Self> {
        if elements_x == 0 || elements_y == 0 {
            return Err(Error::Mesh("element counts must be positive".into()));
        }
        if !(length_x > 0.0 && length_y > 0.0) || !length_x.is_finite() || !length_y.is_finite() {
            return Err(Error::Mesh(format!("domain lengths must be positive, got {length_x} x {length_y}")));
        }
        Ok(Self { elements_x, elements_y, length_x, length_y, periodic })
    }

    pub fn num_elements(&self) -> usize {
        self.elements_x * self.elements_y
    }

    pub fn element_size(&self) -> (f64, f64) {
        (self.length_x / self.elements_x as f64, self.length_y / self.elements_y as f64)
    }

    pub fn element_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.elements_x + ix
    }

    pub fn element_coords(&self, e: usize) -> (usize, usize) {
        (e % self.elements_x, e / self.elements_x)
    }

    /// Lower-left corner of element `e`.
    pub fn origin(&self, e: usize) -> (f64, f64) {
        let (ix, iy) = self.element_coords(e);
        let (hx, hy) = self.element_size();
        (ix as f64 * hx, iy as f64 * hy)
    }

    /// Wraps (or rejects) a shifted element column/row index.
    pub fn wrap(&self, axis: usize, index: isize) -> Option<usize> {
        let count = if axis == 0 { self.elements_x } else { self.elements_y } as isize;
        if self.periodic[axis] {
            Some(index.rem_euclid(count) as usize)
        } else if (0..count).contains(&index) {
            Some(index as usize)
        } else {
            None
        }
    }

    pub fn neighbor(&self, e: usize, dx: isize, dy: isize) -> Option<usize> {
        let (ix, iy) = self.element_coords(e);
        let nx = self.wrap(0, ix as isize + dx)?;
        let ny = self.wrap(1, iy as isize + dy)?;
        Some(self.element_index(nx, ny))
    }

    /// Face neighbors (W, E, S, N) followed by corner neighbors (SW, SE, NW, NE).
    pub fn neighbors(&self, e: usize) -> [Option<usize>; 8] {
        NEIGHBOR_OFFSETS.map(|(dx, dy)| self.neighbor(e, dx, dy))
    }
}
