//! Axis-aligned boxes and points in the plane.

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle given by its min/max corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl AxisBox {
    /// Panics if the corners are not strictly ordered.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        assert!(
            x_min < x_max && y_min < y_max,
            "degenerate box [{x_min}, {x_max}] x [{y_min}, {y_max}]"
        );
        Self { x_min, y_min, x_max, y_max }
    }

    /// Unit square (0,1)^2.
    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    /// Square with the given min corner and side length.
    pub fn square(x_min: f64, y_min: f64, side: f64) -> Self {
        Self::new(x_min, y_min, x_min + side, y_min + side)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Strict interior test.
    pub fn contains_interior(&self, p: Point2) -> bool {
        p.x > self.x_min && p.x < self.x_max && p.y > self.y_min && p.y < self.y_max
    }

    /// Whether `inner` lies inside `self` (closures may touch) up to `tol`.
    pub fn contains_box(&self, inner: &AxisBox, tol: f64) -> bool {
        inner.x_min >= self.x_min - tol
            && inner.y_min >= self.y_min - tol
            && inner.x_max <= self.x_max + tol
            && inner.y_max <= self.y_max + tol
    }

    /// Whether `inner` lies strictly inside `self` (no touching).
    pub fn contains_box_strictly(&self, inner: &AxisBox) -> bool {
        inner.x_min > self.x_min
            && inner.y_min > self.y_min
            && inner.x_max < self.x_max
            && inner.y_max < self.y_max
    }

    /// Whether the inclusion is a square, up to relative tolerance 1e-12.
    pub fn is_square(&self) -> bool {
        let w = self.width();
        let h = self.height();
        (w - h).abs() <= 1e-12 * w.max(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_accessors() {
        let b = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        assert_eq!(b.width(), 0.5);
        assert_eq!(b.area(), 0.25);
        assert!(b.is_square());
        assert!(b.contains(Point2::new(0.5, 0.5)));
        assert!(!b.contains(Point2::new(0.1, 0.5)));
        assert!(AxisBox::unit().contains_box_strictly(&b));
    }

    #[test]
    #[should_panic]
    fn degenerate_box_rejected() {
        AxisBox::new(1.0, 0.0, 1.0, 1.0);
    }
}
