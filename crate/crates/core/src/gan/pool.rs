use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::tensor::Tensor;

/// History buffer of generated images for discriminator updates.
///
/// RNG draw order per queried image, once the pool is full: one `f64` in
/// `[0, 1)`; if it exceeds 0.5, one index in `0..capacity`. No draws happen
/// while the pool is filling or when the capacity is 0.
#[derive(Debug, Clone)]
pub struct ImagePool {
    capacity: usize,
    stored: Vec<Tensor>,
    rng: ChaCha8Rng,
}

impl ImagePool {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Self {
            capacity,
            stored: Vec::with_capacity(capacity),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    /// Passes a single `[1, C, H, W]` image through the pool.
    pub fn query_one(&mut self, fresh: Tensor) -> Tensor {
        if self.capacity == 0 {
            return fresh;
        }
        if self.stored.len() < self.capacity {
            self.stored.push(fresh.clone());
            return fresh;
        }
        let u: f64 = self.rng.random();
        if u > 0.5 {
            let idx = self.rng.random_range(0..self.capacity);
            std::mem::replace(&mut self.stored[idx], fresh)
        } else {
            fresh
        }
    }

    /// Passes every image of an NCHW batch through the pool, in batch order.
    pub fn query(&mut self, fresh: &Tensor) -> Result<Tensor> {
        let [n, ..] = fresh.dims4()?;
        let out = (0..n)
            .map(|i| fresh.batch_item(i).map(|t| self.query_one(t)))
            .collect::<Result<Vec<_>>>()?;
        Tensor::stack_batch(&out)
    }
}
