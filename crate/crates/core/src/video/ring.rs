use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use crate::error::{LeapError, Result};
use crate::video::Frame;

pub const DEFAULT_RING_CAPACITY: usize = 4;

#[derive(Debug)]
struct RingState {
    slots: Vec<Option<Arc<Frame>>>,
    write_cursor: usize,
    last_complete: Option<usize>,
    published: u64,
    closed: bool,
}

#[derive(Debug)]
struct RingInner {
    capacity: usize,
    state: Mutex<RingState>,
    fresh: Condvar,
}

/// Fixed-capacity frame store shared by one producer and one consumer.
///
/// Models a VDMA frame buffer: the producer writes slot after slot and
/// never blocks, silently overwriting the oldest slot once the ring has
/// wrapped. The consumer samples the most recently completed frame.
/// Cloning the handle shares the underlying storage.
#[derive(Debug, Clone)]
pub struct FrameRing {
    inner: Arc<RingInner>,
}

impl Default for FrameRing {
    fn default() -> Self {
        Self::new(DEFAULT_RING_CAPACITY).expect("default capacity is nonzero")
    }
}

impl FrameRing {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(LeapError::Configuration("ring capacity must be at least 1".into()));
        }
        Ok(FrameRing {
            inner: Arc::new(RingInner {
                capacity,
                state: Mutex::new(RingState {
                    slots: vec![None; capacity],
                    write_cursor: 0,
                    last_complete: None,
                    published: 0,
                    closed: false,
                }),
                fresh: Condvar::new(),
            }),
        })
    }

    fn lock(&self) -> MutexGuard<'_, RingState> {
        // a poisoned ring still holds whole frames, so keep serving them
        self.inner.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn capacity(&self) -> usize {
        self.inner.capacity
    }

    /// True when both handles refer to the same storage.
    pub fn same_storage(&self, other: &FrameRing) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// Stores `frame` in the slot under the write cursor and advances it.
    pub fn publish(&self, frame: Frame) {
        self.publish_shared(Arc::new(frame));
    }

    pub fn publish_shared(&self, frame: Arc<Frame>) {
        let mut st = self.lock();
        let slot = st.write_cursor;
        st.slots[slot] = Some(frame);
        st.last_complete = Some(slot);
        st.write_cursor = (slot + 1) % self.inner.capacity;
        st.published += 1;
        drop(st);
        self.inner.fresh.notify_all();
    }

    /// Copy of the most recently completed frame.
    pub fn latest(&self) -> Option<Frame> {
        self.latest_shared().map(|f| (*f).clone())
    }

    /// The most recently completed frame without copying its pixels.
    pub fn latest_shared(&self) -> Option<Arc<Frame>> {
        let st = self.lock();
        st.last_complete.and_then(|s| st.slots[s].clone())
    }

    pub fn last_complete_index(&self) -> Option<u64> {
        self.latest_shared().map(|f| f.index)
    }

    pub fn write_cursor(&self) -> usize {
        self.lock().write_cursor
    }

    pub fn published(&self) -> u64 {
        self.lock().published
    }

    /// Indices of retained frames, oldest first.
    pub fn retained_indices(&self) -> Vec<u64> {
        let st = self.lock();
        let cap = self.inner.capacity;
        (0..cap)
            .map(|k| (st.write_cursor + k) % cap)
            .filter_map(|s| st.slots[s].as_ref().map(|f| f.index))
            .collect()
    }

    /// Copy of a retained frame by index.
    pub fn get(&self, index: u64) -> Option<Frame> {
        let st = self.lock();
        st.slots
            .iter()
            .flatten()
            .find(|f| f.index == index)
            .map(|f| (**f).clone())
    }

    /// Marks the producer as finished and wakes any waiting consumer.
    pub fn close(&self) {
        self.lock().closed = true;
        self.inner.fresh.notify_all();
    }

    /// Drops every stored frame and reopens the ring.
    pub fn reset(&self) {
        let mut st = self.lock();
        st.slots.iter_mut().for_each(|s| *s = None);
        st.write_cursor = 0;
        st.last_complete = None;
        st.published = 0;
        st.closed = false;
    }

    pub fn is_closed(&self) -> bool {
        self.lock().closed
    }

    /// Blocks until the latest frame is newer than `after` (any frame when
    /// `after` is `None`). Returns `None` once the ring is closed and holds
    /// nothing newer.
    pub fn wait_newer(&self, after: Option<u64>) -> Option<Arc<Frame>> {
        let mut st = self.lock();
        loop {
            let latest = st.last_complete.and_then(|s| st.slots[s].clone());
            if let Some(f) = latest {
                if after.is_none_or(|a| f.index > a) {
                    return Some(f);
                }
            }
            if st.closed {
                return None;
            }
            st = self.inner.fresh.wait(st).unwrap_or_else(|e| e.into_inner());
        }
    }
}
