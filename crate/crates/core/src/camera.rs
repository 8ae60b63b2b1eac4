//! Pinhole camera, depth rasters, point clouds and the pose-indexed depth
//! feature.

use alloc::vec;
use alloc::vec::Vec;

use crate::lie::{RigidTransform, Vec3};
use crate::math;

/// Depth value of pixels that see no object, mm. Strictly larger than any
/// depth a scene can produce.
pub const BACKGROUND_MM: f64 = 1.0e6;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CameraModel {
    /// Focal length, px.
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel::PRESET
    }
}

impl CameraModel {
    /// 640×480, f = 600 px, principal point at the image centre.
    pub const PRESET: CameraModel = CameraModel { focal: 600.0, cx: 320.0, cy: 240.0, width: 640, height: 480 };

    /// `(f x/z + cx, f y/z + cy)`, or `None` behind the camera.
    #[inline]
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        let inv = self.focal / p.z;
        Some((p.x * inv + self.cx, p.y * inv + self.cy))
    }

    /// The 3-D point seen at pixel `(u, v)` with depth `z`.
    #[inline]
    pub fn back_project(&self, u: f64, v: f64, z: f64) -> Vec3 {
        Vec3::new((u - self.cx) * z / self.focal, (v - self.cy) * z / self.focal, z)
    }

    /// Direction of the ray through pixel `(u, v)`, scaled so its z is 1.
    #[inline]
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.focal, (v - self.cy) / self.focal, 1.0)
    }
}

/// A full-frame depth raster stored as its foreground bounding window;
/// everything outside the window is background.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    x0: i64,
    y0: i64,
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl DepthImage {
    /// An all-background frame.
    pub fn empty(width: u32, height: u32) -> DepthImage {
        DepthImage { width, height, x0: 0, y0: 0, w: 0, h: 0, data: Vec::new() }
    }

    /// A window of the frame at `(x0, y0)` with the given row-major values.
    /// Panics if the window leaves the frame or `data` has the wrong length.
    pub fn from_window(width: u32, height: u32, x0: u32, y0: u32, w: usize, h: usize, data: Vec<f64>) -> DepthImage {
        assert!(x0 as usize + w <= width as usize && y0 as usize + h <= height as usize);
        assert_eq!(data.len(), w * h);
        DepthImage { width, height, x0: x0 as i64, y0: y0 as i64, w, h, data }
    }

    /// Full-frame raster from row-major values.
    pub fn from_full(width: u32, height: u32, data: Vec<f64>) -> DepthImage {
        Self::from_window(width, height, 0, 0, width as usize, height as usize, data).cropped()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// `(x0, y0, w, h)` of the stored window.
    pub fn window(&self) -> (u32, u32, usize, usize) {
        (self.x0 as u32, self.y0 as u32, self.w, self.h)
    }

    /// Depth at integer pixel `(x, y)`; background outside the frame.
    #[inline]
    pub fn get(&self, x: i64, y: i64) -> f64 {
        let lx = x - self.x0;
        let ly = y - self.y0;
        if lx < 0 || ly < 0 || lx as usize >= self.w || ly as usize >= self.h {
            return BACKGROUND_MM;
        }
        self.data[ly as usize * self.w + lx as usize]
    }

    /// Depth at the pixel whose centre is nearest to `(u, v)`.
    #[inline]
    pub fn sample(&self, u: f64, v: f64) -> f64 {
        let (a, b) = (u + 0.5, v + 0.5);
        // negative and non-finite coordinates are outside the frame
        if !(a >= 0.0 && a < 1.0e9 && b >= 0.0 && b < 1.0e9) {
            return BACKGROUND_MM;
        }
        self.get(a as i64, b as i64)
    }

    pub(crate) fn window_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Every pixel of the frame, row-major.
    pub fn to_full(&self) -> Vec<f64> {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut out = vec![BACKGROUND_MM; w * h];
        for ly in 0..self.h {
            let y = ly + self.y0 as usize;
            let row = &self.data[ly * self.w..(ly + 1) * self.w];
            out[y * w + self.x0 as usize..y * w + self.x0 as usize + self.w].copy_from_slice(row);
        }
        out
    }

    /// Shrinks the window to the bounding box of the foreground.
    pub fn cropped(self) -> DepthImage {
        let (mut xmin, mut ymin, mut xmax, mut ymax) = (usize::MAX, usize::MAX, 0, 0);
        for ly in 0..self.h {
            for lx in 0..self.w {
                if self.data[ly * self.w + lx] < BACKGROUND_MM {
                    xmin = xmin.min(lx);
                    xmax = xmax.max(lx);
                    ymin = ymin.min(ly);
                    ymax = ymax.max(ly);
                }
            }
        }
        if xmin == usize::MAX {
            return DepthImage::empty(self.width, self.height);
        }
        let (w, h) = (xmax - xmin + 1, ymax - ymin + 1);
        let mut data = Vec::with_capacity(w * h);
        for ly in ymin..=ymax {
            data.extend_from_slice(&self.data[ly * self.w + xmin..ly * self.w + xmin + w]);
        }
        DepthImage { width: self.width, height: self.height, x0: self.x0 + xmin as i64, y0: self.y0 + ymin as i64, w, h, data }
    }

    /// Foreground pixels as `(x, y, depth)`.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.data.iter().enumerate().filter(|(_, d)| **d < BACKGROUND_MM).map(move |(i, d)| {
            ((self.x0 as usize + i % self.w) as u32, (self.y0 as usize + i / self.w) as u32, *d)
        })
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|d| **d < BACKGROUND_MM).count()
    }

    /// Rounds every foreground depth to whole millimetres.
    pub fn quantize_mm(&mut self) {
        for d in self.data.iter_mut() {
            if *d < BACKGROUND_MM {
                *d = math::round(*d);
            }
        }
    }

    /// Pixel-wise equality over the whole frame, regardless of window.
    pub fn same_raster(&self, other: &DepthImage) -> bool {
        self.width == other.width && self.height == other.height && self.to_full() == other.to_full()
    }
}

/// Back-projected foreground, camera frame, mm.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn from_image(image: &DepthImage, camera: &CameraModel) -> PointCloud {
        PointCloud {
            points: image
                .foreground()
                .map(|(x, y, d)| camera.back_project(x as f64, y as f64, d))
                .collect(),
        }
    }

    /// Projects every point to its nearest pixel, keeping the nearest depth.
    pub fn rasterize(&self, camera: &CameraModel) -> DepthImage {
        let (w, h) = (camera.width as usize, camera.height as usize);
        let mut full = vec![BACKGROUND_MM; w * h];
        for p in &self.points {
            if let Some((u, v)) = camera.project(*p) {
                let (x, y) = (math::floor(u + 0.5), math::floor(v + 0.5));
                if x >= 0.0 && y >= 0.0 && (x as usize) < w && (y as usize) < h {
                    let cell = &mut full[y as usize * w + x as usize];
                    *cell = cell.min(p.z);
                }
            }
        }
        DepthImage::from_full(camera.width, camera.height, full)
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::ZERO, |a, p| a + *p);
        Some(sum * (1.0 / self.points.len() as f64))
    }
}

/// `d(Proj(x + R u)) − d(Proj(x + R v))`: depth difference between two probe
/// points attached to a joint. `R` is the rotation of the joint's cumulative
/// transform and `x` its position; probes that fall behind the camera or
/// outside the frame read [`BACKGROUND_MM`].
#[inline]
pub fn pose_indexed_feature(
    image: &DepthImage,
    camera: &CameraModel,
    joint_transform: &RigidTransform,
    joint_pos: Vec3,
    u: Vec3,
    v: Vec3,
) -> f64 {
    probe_depth(image, camera, joint_transform, joint_pos, u) - probe_depth(image, camera, joint_transform, joint_pos, v)
}

/// Depth read at the projection of `x + R u`.
#[inline]
pub fn probe_depth(image: &DepthImage, camera: &CameraModel, g: &RigidTransform, x: Vec3, u: Vec3) -> f64 {
    match camera.project(x + g.rotation.rotate(u)) {
        Some((pu, pv)) => image.sample(pu, pv),
        None => BACKGROUND_MM,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(depth: f64) -> DepthImage {
        let c = CameraModel::PRESET;
        DepthImage::from_full(c.width, c.height, vec![depth; (c.width * c.height) as usize])
    }

    #[test]
    fn projection_round_trip() {
        let c = CameraModel::PRESET;
        let p = Vec3::new(12.0, -7.0, 250.0);
        let (u, v) = c.project(p).unwrap();
        assert!(c.back_project(u, v, 250.0).distance(p) < 1e-12);
        assert_eq!(c.project(Vec3::new(0.0, 0.0, -1.0)), None);
    }

    #[test]
    fn window_lookup() {
        let img = DepthImage::from_window(640, 480, 10, 20, 2, 1, vec![5.0, 6.0]);
        assert_eq!(img.get(10, 20), 5.0);
        assert_eq!(img.get(11, 20), 6.0);
        assert_eq!(img.get(12, 20), BACKGROUND_MM);
        assert_eq!(img.get(-1, -1), BACKGROUND_MM);
        assert_eq!(img.sample(10.49, 19.6), 5.0);
        assert_eq!(img.sample(f64::NAN, 0.0), BACKGROUND_MM);
    }

    #[test]
    fn feature_identical_offsets_is_zero() {
        let img = plane(300.0);
        let g = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 300.0));
        let u = Vec3::new(3.0, 4.0, 0.0);
        assert_eq!(pose_indexed_feature(&img, &CameraModel::PRESET, &g, g.translation, u, u), 0.0);
    }

    #[test]
    fn feature_on_background_is_zero() {
        let img = DepthImage::empty(640, 480);
        let g = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 300.0));
        let f = pose_indexed_feature(&img, &CameraModel::PRESET, &g, g.translation, Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO);
        assert_eq!(f, 0.0);
    }

    #[test]
    fn feature_plane_versus_off_image() {
        let img = plane(300.0);
        let g = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 300.0));
        // 1000 mm to the side at 300 mm projects 2000 px off-centre
        let f = pose_indexed_feature(&img, &CameraModel::PRESET, &g, g.translation, Vec3::ZERO, Vec3::new(1000.0, 0.0, 0.0));
        assert_eq!(f, 300.0 - BACKGROUND_MM);
    }

    #[test]
    fn point_cloud_re_rasterizes() {
        let mut data = vec![BACKGROUND_MM; 640 * 480];
        for (i, d) in data.iter_mut().enumerate().skip(1000).step_by(997).take(60) {
            *d = 200.0 + (i % 17) as f64;
        }
        let img = DepthImage::from_full(640, 480, data);
        let cloud = PointCloud::from_image(&img, &CameraModel::PRESET);
        assert_eq!(cloud.points.len(), 60);
        assert!(cloud.rasterize(&CameraModel::PRESET).same_raster(&img));
    }
}
