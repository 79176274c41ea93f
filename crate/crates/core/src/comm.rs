//! Cluster-local power-released registers.
//!
//! A device that switches advertises the opposite action as a slot to the
//! other members of its cluster for a window of `window` seconds. A blocked
//! device may switch regardless of the frequency by consuming such a slot.

use thiserror::Error;

use crate::fleet::Switch;
use crate::scalar::Scalar;

/// Register of one device: the released amount and when it was set.
///
/// In the uniform-power protocol `value` is one of `+1`, `0`, `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerReleased<S> {
    pub value: S,
    pub set_at: S,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("device {device} is out of range for a fleet of {devices}")]
    OutOfRange { device: usize, devices: usize },
    #[error("device {0} belongs to more than one cluster")]
    Duplicate(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
}

#[derive(Debug, Clone)]
pub struct CommRegistry<S> {
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<Option<usize>>,
    registers: Vec<PowerReleased<S>>,
    window: S,
}

impl<S: Scalar> CommRegistry<S> {
    /// Builds a registry over a fleet of `devices` from a partition of the
    /// communicating device ids.
    pub fn new(devices: usize, clusters: Vec<Vec<usize>>, window: S) -> Result<Self, RegistryError> {
        let mut cluster_of = vec![None; devices];
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(RegistryError::EmptyCluster(c));
            }
            for &id in members {
                let slot = cluster_of
                    .get_mut(id)
                    .ok_or(RegistryError::OutOfRange { device: id, devices })?;
                if slot.replace(c).is_some() {
                    return Err(RegistryError::Duplicate(id));
                }
            }
        }
        Ok(Self {
            clusters,
            cluster_of,
            registers: vec![PowerReleased::default(); devices],
            window,
        })
    }

    pub fn window(&self) -> S {
        self.window
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.clusters[cluster]
    }

    pub fn cluster_of(&self, device: usize) -> Option<usize> {
        self.cluster_of.get(device).copied().flatten()
    }

    pub fn register(&self, device: usize) -> PowerReleased<S> {
        self.registers[device]
    }

    /// Records an actual switch: switching on takes power (`-1`), switching
    /// off releases it (`+1`).
    pub fn record_switch(&mut self, device: usize, direction: Switch, now: S) {
        self.record_switch_power(device, direction, S::one(), now);
    }

    /// Records an actual switch of a device drawing `power`.
    pub fn record_switch_power(&mut self, device: usize, direction: Switch, power: S, now: S) {
        let value = match direction {
            Switch::On => -power,
            Switch::Off => power,
        };
        self.registers[device] = PowerReleased { value, set_at: now };
    }

    /// Clears every register older than the window.
    pub fn expire(&mut self, now: S) {
        let window = self.window;
        for r in self.registers.iter_mut() {
            if r.value != S::zero() && now - r.set_at > window {
                r.value = S::zero();
            }
        }
    }

    /// Searches the cluster in `order` for a device that released a slot for
    /// `desired` and consumes it. The searcher itself is skipped.
    pub fn find_and_consume<I>(
        &mut self,
        cluster: usize,
        searcher: usize,
        desired: Switch,
        order: I,
    ) -> Option<usize>
    where
        I: IntoIterator<Item = usize>,
    {
        if self.window <= S::zero() {
            return None;
        }
        let wanted_positive = desired == Switch::On;
        let found = order.into_iter().find(|&id| {
            debug_assert_eq!(self.cluster_of(id), Some(cluster));
            let v = self.registers[id].value;
            id != searcher && if wanted_positive { v > S::zero() } else { v < S::zero() }
        })?;
        self.registers[found].value = S::zero();
        Some(found)
    }

    /// Variable-power search: finds the first device whose released amount has
    /// the sign of `needed` and covers it, and deducts `needed` from it.
    pub fn find_and_consume_power<I>(
        &mut self,
        cluster: usize,
        searcher: usize,
        needed: S,
        order: I,
    ) -> Option<usize>
    where
        I: IntoIterator<Item = usize>,
    {
        if self.window <= S::zero() || needed == S::zero() {
            return None;
        }
        let found = order.into_iter().find(|&id| {
            debug_assert_eq!(self.cluster_of(id), Some(cluster));
            let v = self.registers[id].value;
            id != searcher && v.signum() == needed.signum() && v.abs() >= needed.abs()
        })?;
        self.registers[found].value = self.registers[found].value - needed;
        Some(found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry(window: f64) -> CommRegistry<f64> {
        CommRegistry::new(4, vec![vec![0, 1, 2], vec![3]], window).unwrap()
    }

    #[test]
    fn record_sets_sign_and_time() {
        let mut r = registry(30.0);
        r.record_switch(0, Switch::On, 10.0);
        assert_eq!(r.register(0), PowerReleased { value: -1.0, set_at: 10.0 });
        r.record_switch(1, Switch::Off, 10.0);
        assert_eq!(r.register(1), PowerReleased { value: 1.0, set_at: 10.0 });
        r.record_switch(0, Switch::Off, 12.0);
        assert_eq!(r.register(0), PowerReleased { value: 1.0, set_at: 12.0 });
    }

    #[test]
    fn expiry_after_window() {
        let mut r = registry(30.0);
        r.record_switch(1, Switch::Off, 0.0);
        r.expire(29.0);
        assert_eq!(r.register(1).value, 1.0);
        r.expire(30.0);
        assert_eq!(r.register(1).value, 1.0);
        r.expire(31.0);
        assert_eq!(r.register(1).value, 0.0);
        r.expire(100.0);
        assert_eq!(r.register(2).value, 0.0);
    }

    #[test]
    fn match_consumes_provider() {
        let mut r = registry(30.0);
        r.record_switch(1, Switch::Off, 0.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::On, [0, 1, 2]), Some(1));
        assert_eq!(r.register(1).value, 0.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::On, [0, 1, 2]), None);
    }

    #[test]
    fn no_match_leaves_registry_unchanged() {
        let mut r = registry(30.0);
        r.record_switch(1, Switch::On, 0.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::On, [0, 1, 2]), None);
        assert_eq!(r.register(1).value, -1.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::Off, [0, 1, 2]), Some(1));
    }

    #[test]
    fn first_match_in_order_wins() {
        let mut r = registry(30.0);
        r.record_switch(1, Switch::Off, 0.0);
        r.record_switch(2, Switch::Off, 0.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::On, [2, 0, 1]), Some(2));
        assert_eq!(r.register(1).value, 1.0);
        assert_eq!(r.register(2).value, 0.0);
    }

    #[test]
    fn searcher_skips_itself() {
        let mut r = registry(30.0);
        r.record_switch(3, Switch::Off, 0.0);
        assert_eq!(r.find_and_consume(1, 3, Switch::On, [3]), None);
        r.record_switch(0, Switch::Off, 0.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::On, [0, 1, 2]), None);
    }

    #[test]
    fn zero_window_never_matches() {
        let mut r = registry(0.0);
        r.record_switch(1, Switch::Off, 5.0);
        r.expire(5.0);
        assert_eq!(r.find_and_consume(0, 0, Switch::On, [0, 1, 2]), None);
    }

    #[test]
    fn power_matching() {
        let mut r = registry(30.0);
        r.record_switch_power(1, Switch::Off, 1.0, 0.0);
        assert_eq!(r.find_and_consume_power(0, 0, 1.0, [0, 1, 2]), Some(1));
        assert_eq!(r.register(1).value, 0.0);

        r.record_switch_power(1, Switch::Off, 0.5, 0.0);
        assert_eq!(r.find_and_consume_power(0, 0, 1.0, [0, 1, 2]), None);
        assert_eq!(r.register(1).value, 0.5);

        r.record_switch_power(2, Switch::Off, 2.0, 0.0);
        assert_eq!(r.find_and_consume_power(0, 0, 1.0, [0, 1, 2]), Some(2));
        assert_eq!(r.register(2).value, 1.0);

        r.record_switch_power(0, Switch::On, 1.5, 0.0);
        assert_eq!(r.find_and_consume_power(0, 1, -1.0, [0, 1, 2]), Some(0));
        assert_eq!(r.register(0).value, -0.5);
    }

    #[test]
    fn invalid_partitions() {
        assert_eq!(
            CommRegistry::<f64>::new(3, vec![vec![0, 1], vec![1]], 1.0).unwrap_err(),
            RegistryError::Duplicate(1)
        );
        assert_eq!(
            CommRegistry::<f64>::new(3, vec![vec![0, 5]], 1.0).unwrap_err(),
            RegistryError::OutOfRange { device: 5, devices: 3 }
        );
        assert_eq!(
            CommRegistry::<f64>::new(3, vec![vec![]], 1.0).unwrap_err(),
            RegistryError::EmptyCluster(0)
        );
    }
}
