/// Densely packed array of fixed-width unsigned fields (1 to 64 bits each).
///
/// Fields may straddle word boundaries, so storage is exactly
/// `len * width` bits rounded up to whole words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedArray {
    words: Vec<u64>,
    width: u32,
    len: usize,
}

impl PackedArray {
    pub fn new(len: usize, width: u32) -> Self {
        assert!((1..=64).contains(&width), "field width {width} out of range");
        Self {
            words: vec![0; (len * width as usize).div_ceil(64)],
            width,
            len,
        }
    }

    pub(crate) fn from_words(len: usize, width: u32, words: Vec<u64>) -> Option<Self> {
        let bits = len * width as usize;
        if !(1..=64).contains(&width) || words.len() != bits.div_ceil(64) {
            return None;
        }
        if !bits.is_multiple_of(64) && words[words.len() - 1] >> (bits % 64) != 0 {
            return None;
        }
        Some(Self { words, width, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn storage_bits(&self) -> usize {
        self.len * self.width as usize
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len, "field index {i} out of range {}", self.len);
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mut v = self.words[w] >> off;
        if off + self.width as usize > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & self.mask()
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: u64) {
        assert!(i < self.len, "field index {i} out of range {}", self.len);
        let mask = self.mask();
        debug_assert!(value & !mask == 0, "value {value} wider than {} bits", self.width);
        let value = value & mask;
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        self.words[w] = (self.words[w] & !(mask << off)) | (value << off);
        if off + self.width as usize > 64 {
            let spill = 64 - off;
            let hi_mask = mask >> spill;
            self.words[w + 1] = (self.words[w + 1] & !hi_mask) | (value >> spill);
        }
    }
}
