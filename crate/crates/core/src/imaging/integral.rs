use super::{GrayImage, ImagingError, Rect};

/// Which table a rectangle sum reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Plain,
    Squared,
}

/// Summed-area tables of pixel values and squared pixel values.
///
/// Both tables are `(width + 1) x (height + 1)` with a zero first row and
/// column, so entry `(x, y)` holds the inclusive sum over all pixels with
/// column `< x` and row `< y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralPair {
    width: u32,
    height: u32,
    ii: Vec<u64>,
    sq: Vec<u64>,
}

impl IntegralPair {
    /// Builds both tables in one pass using running column sums:
    /// `s(x, y) = s(x, y - 1) + i(x, y)` and `ii(x, y) = ii(x - 1, y) + s(x, y)`.
    pub fn new(img: &GrayImage) -> Self {
        let w = img.width() as usize;
        let h = img.height() as usize;
        let stride = w + 1;
        let mut ii = vec![0u64; stride * (h + 1)];
        let mut sq = vec![0u64; stride * (h + 1)];
        let mut col = vec![0u64; w];
        let mut col_sq = vec![0u64; w];
        let data = img.data();
        for y in 0..h {
            let row = &data[y * w..(y + 1) * w];
            let base = (y + 1) * stride;
            for x in 0..w {
                let p = row[x] as u64;
                col[x] += p;
                col_sq[x] += p * p;
                ii[base + x + 1] = ii[base + x] + col[x];
                sq[base + x + 1] = sq[base + x] + col_sq[x];
            }
        }
        Self {
            width: img.width(),
            height: img.height(),
            ii,
            sq,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Table entry at corner `(x, y)`, `0 <= x <= width`, `0 <= y <= height`.
    #[inline]
    pub fn ii(&self, x: u32, y: u32) -> u64 {
        self.ii[y as usize * (self.width as usize + 1) + x as usize]
    }

    #[inline]
    pub fn sq(&self, x: u32, y: u32) -> u64 {
        self.sq[y as usize * (self.width as usize + 1) + x as usize]
    }

    /// Four-lookup sum over `r`.
    pub fn rect_sum(&self, r: Rect, channel: Channel) -> Result<u64, ImagingError> {
        if !r.fits(self.width, self.height) {
            return Err(ImagingError::OutOfBounds {
                rect: r,
                width: self.width,
                height: self.height,
            });
        }
        Ok(match channel {
            Channel::Plain => self.sum_unchecked(r),
            Channel::Squared => self.sq_sum_unchecked(r),
        })
    }

    #[inline]
    pub(crate) fn sum_unchecked(&self, r: Rect) -> u64 {
        debug_assert!(r.fits(self.width, self.height));
        four_tap(&self.ii, self.width as usize + 1, r)
    }

    #[inline]
    pub(crate) fn sq_sum_unchecked(&self, r: Rect) -> u64 {
        debug_assert!(r.fits(self.width, self.height));
        four_tap(&self.sq, self.width as usize + 1, r)
    }
}

#[inline]
fn four_tap(table: &[u64], stride: usize, r: Rect) -> u64 {
    let (x0, y0) = (r.x as usize, r.y as usize);
    let (x1, y1) = (x0 + r.w as usize, y0 + r.h as usize);
    // Summed in this order the intermediate never underflows.
    table[y1 * stride + x1] + table[y0 * stride + x0] - table[y0 * stride + x1] - table[y1 * stride + x0]
}
