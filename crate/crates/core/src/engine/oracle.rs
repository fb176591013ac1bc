//! Decides whether an open interval meets the attractor of a
//! hull-normalized IFS.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Mutex;

use crate::field::{ContextExt, ParamValue};
use crate::ifs::Ifs;

use super::EngineError;

type Key = (ParamValue, ParamValue);

enum Class {
    Accept,
    Empty,
    State(Key),
}

/// Memoized state search over clipped preimages. A state is an interval
/// `(a, b)` with `0 ≤ a < b ≤ 1`; it is accepting once an endpoint of the
/// hull (both lie in the attractor) falls strictly inside.
pub struct Oracle {
    ifs: Ifs,
    zero: ParamValue,
    one: ParamValue,
    max_states: usize,
    cache: Mutex<HashMap<Key, bool>>,
}

impl Oracle {
    pub fn new(ifs: Ifs, max_states: usize) -> Self {
        let ctx = ifs.context().clone();
        Oracle {
            ifs,
            zero: ctx.zero(),
            one: ctx.one(),
            max_states,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    fn classify(&self, a: &ParamValue, b: &ParamValue) -> Result<Class, EngineError> {
        if a.lt(&self.zero)? && self.zero.lt(b)? {
            return Ok(Class::Accept);
        }
        if a.lt(&self.one)? && self.one.lt(b)? {
            return Ok(Class::Accept);
        }
        let lo = a.max(&self.zero)?;
        let hi = b.min(&self.one)?;
        if hi.le(&lo)? {
            return Ok(Class::Empty);
        }
        Ok(Class::State((lo, hi)))
    }

    fn cached(&self, k: &Key) -> Option<bool> {
        self.cache.lock().unwrap().get(k).copied()
    }

    /// `K ∩ (a, b) ≠ ∅`.
    pub fn meets(&self, a: &ParamValue, b: &ParamValue) -> Result<bool, EngineError> {
        let start = match self.classify(a, b)? {
            Class::Accept => return Ok(true),
            Class::Empty => return Ok(false),
            Class::State(k) => k,
        };
        if let Some(v) = self.cached(&start) {
            return Ok(v);
        }
        let mut seen: HashSet<Key> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start.clone());
        while let Some((lo, hi)) = queue.pop_front() {
            for m in self.ifs.maps() {
                let (x, y) = m.preimage_interval(&lo, &hi)?;
                match self.classify(&x, &y)? {
                    Class::Accept => {
                        self.cache.lock().unwrap().insert(start, true);
                        return Ok(true);
                    }
                    Class::Empty => {}
                    Class::State(k) => match self.cached(&k) {
                        Some(true) => {
                            self.cache.lock().unwrap().insert(start, true);
                            return Ok(true);
                        }
                        Some(false) => {}
                        None => {
                            if seen.insert(k.clone()) {
                                if seen.len() > self.max_states {
                                    return Err(EngineError::OracleBudgetExceeded(self.max_states));
                                }
                                queue.push_back(k);
                            }
                        }
                    },
                }
            }
        }
        // closed without reaching an accepting state: every visited state misses K
        let mut cache = self.cache.lock().unwrap();
        for k in seen {
            cache.insert(k, false);
        }
        Ok(false)
    }
}
