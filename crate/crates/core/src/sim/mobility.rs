//! Step-based random waypoint with zero pause time.

use rand::Rng;

use super::topology::{distance, uniform_point, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Walker {
    pub position: Point,
    pub waypoint: Point,
}

/// Moves `speed * dt` toward the waypoint. Reaching it within this step
/// snaps to the waypoint and draws the next one; leftover travel is dropped.
pub fn step_mobility<R: Rng + ?Sized>(w: Walker, speed_mps: f64, dt_s: f64, area_m: (f64, f64), rng: &mut R) -> Walker {
    let travel = speed_mps.max(0.0) * dt_s;
    if travel == 0.0 {
        return w;
    }
    let remaining = distance(w.position, w.waypoint);
    if remaining <= travel {
        return Walker { position: w.waypoint, waypoint: uniform_point(rng, area_m) };
    }
    let f = travel / remaining;
    let clamp = |v: f64, hi: f64| v.clamp(0.0, hi);
    Walker {
        position: [
            clamp(w.position[0] + f * (w.waypoint[0] - w.position[0]), area_m.0),
            clamp(w.position[1] + f * (w.waypoint[1] - w.position[1]), area_m.1),
        ],
        waypoint: w.waypoint,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const AREA: (f64, f64) = (1000.0, 1000.0);

    #[test]
    fn zero_speed_is_static() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Walker { position: [10.0, 20.0], waypoint: [500.0, 500.0] };
        assert_eq!(step_mobility(w, 0.0, 1.0, AREA, &mut rng), w);
    }

    #[test]
    fn displacement_bounded_and_area_covered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut w = Walker { position: [500.0, 500.0], waypoint: uniform_point(&mut rng, AREA) };
        let mut quadrants = [0usize; 4];
        let samples = 10_000;
        for _ in 0..samples {
            let next = step_mobility(w, 10.0, 1.0, AREA, &mut rng);
            assert!(distance(w.position, next.position) <= 10.0 + 1e-9);
            assert!((0.0..=1000.0).contains(&next.position[0]));
            w = next;
            let q = usize::from(w.position[0] >= 500.0) + 2 * usize::from(w.position[1] >= 500.0);
            quadrants[q] += 1;
        }
        assert!(quadrants.iter().all(|&c| (c as f64) < 0.4 * samples as f64), "{quadrants:?}");
    }

    #[test]
    fn arrival_draws_new_waypoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = Walker { position: [0.0, 0.0], waypoint: [3.0, 4.0] };
        let next = step_mobility(w, 6.0, 1.0, AREA, &mut rng);
        assert_eq!(next.position, [3.0, 4.0]);
        assert_ne!(next.waypoint, [3.0, 4.0]);
    }
}
