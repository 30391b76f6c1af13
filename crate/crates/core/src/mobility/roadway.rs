use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::VehicleId;

use super::trace::{Trace, TracePoint};
use super::MobilityError;

/// Synthetic two-way roadway: a straight road through the middle of a
/// square area, one lane per direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoadwayParams {
    pub n_vehicles: usize,
    /// Side of the square area in meters; also the road length.
    pub area_side: f64,
    /// Seconds simulated; samples are taken at `0, dt, 2dt, ...` below it.
    pub duration: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Distance between the two lane center lines in meters.
    pub lane_separation: f64,
    pub sample_period: f64,
    pub seed: u64,
}

impl Default for RoadwayParams {
    fn default() -> Self {
        RoadwayParams {
            n_vehicles: 300,
            area_side: 5_000.0,
            duration: 120.0,
            speed_min: 10.0,
            speed_max: 30.0,
            lane_separation: 10.0,
            sample_period: 1.0,
            seed: 0,
        }
    }
}

impl RoadwayParams {
    fn validate(&self) -> Result<(), MobilityError> {
        let positive = [
            ("area_side", self.area_side),
            ("duration", self.duration),
            ("speed_min", self.speed_min),
            ("speed_max", self.speed_max),
            ("sample_period", self.sample_period),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(MobilityError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.n_vehicles == 0 {
            return Err(MobilityError::InvalidParameter("n_vehicles must be positive".into()));
        }
        if self.speed_max < self.speed_min {
            return Err(MobilityError::InvalidParameter("speed_max is below speed_min".into()));
        }
        if !(self.lane_separation.is_finite() && self.lane_separation >= 0.0) {
            return Err(MobilityError::InvalidParameter(
                "lane_separation must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Generates a two-way roadway trace.
///
/// Even ids drive east (+x) in the lower lane, odd ids west (-x) in the
/// upper lane, each at a constant speed drawn from
/// `[speed_min, speed_max]`. Start positions are drawn so that a vehicle
/// stays on the road segment for the whole run when its speed allows; the
/// road continues past the area so vehicles never wrap or turn. Every
/// vehicle is sampled at every instant.
pub fn generate_two_way_roadway(params: &RoadwayParams) -> Result<Trace, MobilityError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mid = params.area_side / 2.0;
    let half_gap = params.lane_separation / 2.0;

    struct Car {
        x0: f64,
        y: f64,
        velocity: f64,
    }
    let cars: Vec<Car> = (0..params.n_vehicles)
        .map(|i| {
            let speed = if params.speed_max > params.speed_min {
                rng.gen_range(params.speed_min..=params.speed_max)
            } else {
                params.speed_min
            };
            let travel = speed * params.duration;
            let slack = (params.area_side - travel).max(0.0);
            let offset = if slack > 0.0 { rng.gen_range(0.0..slack) } else { 0.0 };
            if i % 2 == 0 {
                Car {
                    x0: offset,
                    y: mid - half_gap,
                    velocity: speed,
                }
            } else {
                Car {
                    x0: params.area_side - offset,
                    y: mid + half_gap,
                    velocity: -speed,
                }
            }
        })
        .collect();

    let steps = (params.duration / params.sample_period - 1e-9).ceil().max(1.0) as usize;
    let mut points = Vec::with_capacity(steps * cars.len());
    for s in 0..steps {
        let t = s as f64 * params.sample_period;
        for (i, car) in cars.iter().enumerate() {
            points.push(TracePoint {
                time: t,
                vehicle: VehicleId(i as u64),
                x: car.x0 + car.velocity * t,
                y: car.y,
            });
        }
    }
    Trace::new(points)
}
