use super::LEVELS;
use std::collections::VecDeque;

/// Priority queue over the 1001 quantized grades, one FIFO per grade.
///
/// Pops always come from the highest non-empty bucket. Pushing above the
/// cursor is allowed and moves it up; the engine never does so, which makes
/// its extraction order non-increasing.
#[derive(Debug, Clone)]
pub struct BucketQueue {
    buckets: Vec<VecDeque<u32>>,
    cursor: usize,
    len: usize,
}

impl Default for BucketQueue {
    fn default() -> Self {
        Self::new()
    }
}

impl BucketQueue {
    pub fn new() -> Self {
        Self { buckets: vec![VecDeque::new(); usize::from(LEVELS) + 1], cursor: 0, len: 0 }
    }

    pub fn push(&mut self, level: u16, item: u32) {
        let l = usize::from(level);
        self.buckets[l].push_back(item);
        self.cursor = self.cursor.max(l);
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<(u16, u32)> {
        if self.len == 0 {
            return None;
        }
        loop {
            if let Some(item) = self.buckets[self.cursor].pop_front() {
                self.len -= 1;
                return Some((self.cursor as u16, item));
            }
            self.cursor -= 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fifo_within_a_level() {
        let mut q = BucketQueue::new();
        q.push(500, 1);
        q.push(500, 2);
        q.push(1000, 3);
        q.push(0, 4);
        assert_eq!(q.pop(), Some((1000, 3)));
        assert_eq!(q.pop(), Some((500, 1)));
        assert_eq!(q.pop(), Some((500, 2)));
        assert_eq!(q.pop(), Some((0, 4)));
        assert_eq!(q.pop(), None);
        assert!(q.is_empty());
    }

    proptest! {
        #[test]
        fn pops_in_non_increasing_order(items in prop::collection::vec(0u16..=1000, 0..200)) {
            let mut q = BucketQueue::new();
            for (i, &l) in items.iter().enumerate() {
                q.push(l, i as u32);
            }
            let mut last = u16::MAX;
            let mut n = 0;
            while let Some((l, i)) = q.pop() {
                prop_assert!(l <= last);
                prop_assert_eq!(items[i as usize], l);
                last = l;
                n += 1;
            }
            prop_assert_eq!(n, items.len());
        }
    }
}
