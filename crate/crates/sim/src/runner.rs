//! Fixed-step multi-rate scenario loop.
//!
//! Every process runs on a divisor of the base tick. Within one tick the
//! order is: scheduled disturbances, sensors, mission progress, helm
//! decision, helm filter, inner loop, estimator and certification,
//! proximity loads, logging, truth integration. Consumers therefore only
//! see data produced at or before their own tick.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DVector;
use usv_core::control::{ControllerKind, InnerLoop, InnerLoopConfig, InnerLoopOutput, Measurement, Reference};
use usv_core::disturbance::{bank_effect, hull_wash, BankEffect, FaultConfig};
use usv_core::guidance::{
    arbiter, delta_theta, helm_filter_step, BehaviorDecision, DecisionGrid, HelmFilterState, PeakedUtility,
    WeightedUtility,
};
use usv_core::reach::{build_closed_loop_graph, certify, CertifyInput};
use usv_core::vehicle::{BodyVelocity, Pose, VehicleState};

use crate::config::{DisturbanceKind, ScenarioConfig, Trigger};
use crate::error::SimResult;
use crate::estimator::VehicleEstimator;
use crate::log::{Command, EventSummary, Invocations, Outcome, Record, RunLog, RunSummary, TickErrors};
use crate::metrics::compute_metrics;
use crate::mission::Mission;
use crate::plant::{PlantLoads, TruthVehicle};
use crate::sensors::{NavSolution, Sensors};

struct VehicleRt {
    truth: TruthVehicle,
    nav: NavSolution,
    sensors: Sensors,
    mission: Mission,
    grid: DecisionGrid,
    helm: HelmFilterState,
    decision: BehaviorDecision,
    reference: Reference,
    controller: InnerLoop,
    out: InnerLoopOutput,
    loads: PlantLoads,
    /// Faults from scheduled events; proximity biases are added per tick.
    scheduled: FaultConfig,
    active: Vec<String>,
    progress: BTreeSet<String>,
    estimator: Option<VehicleEstimator>,
    /// Navigation solutions of recent ticks, newest last, for delayed sharing.
    shared: VecDeque<NavSolution>,
    certify_unsupported: bool,
}

struct Run<'a> {
    cfg: &'a ScenarioConfig,
    vehicles: Vec<VehicleRt>,
    records: Vec<Record>,
    events: Vec<EventSummary>,
    fired: Vec<bool>,
    inv: Invocations,
    projection_violations: u64,
    certify_unsafe: u64,
    min_separation: Option<f64>,
    outcome: Option<Outcome>,
}

/// Runs one scenario with every vehicle on `controller`.
pub fn run_scenario(cfg: &ScenarioConfig, controller: ControllerKind) -> SimResult<RunLog> {
    cfg.validate()?;
    let mut run = Run::new(cfg, controller)?;
    let end_time = run.execute()?;
    let outcome = run.outcome.unwrap_or(Outcome::Timeout);
    let summary = RunSummary {
        schema: crate::config::SCHEMA_VERSION,
        scenario: cfg.name.clone(),
        controller,
        seed: cfg.seed,
        outcome,
        end_time,
        primary_vehicle: cfg.primary_vehicle,
        metrics: Vec::new(),
        events: run.events,
        invocations: run.inv,
        projection_violations: run.projection_violations,
        certify_unsafe: run.certify_unsafe,
        min_separation: run.min_separation,
    };
    let mut log = RunLog {
        records: run.records,
        summary,
    };
    log.summary.metrics = compute_metrics(&log);
    Ok(log)
}

impl<'a> Run<'a> {
    fn new(cfg: &'a ScenarioConfig, kind: ControllerKind) -> SimResult<Self> {
        let base_dt = cfg.rates.base_dt();
        let ctrl_dt = 1.0 / cfg.rates.controller as f64;
        let mut vehicles = Vec::with_capacity(cfg.vehicles.len());
        for (i, v) in cfg.vehicles.iter().enumerate() {
            let start = VehicleState::new(
                Pose::new(v.start.x, v.start.y, v.start.heading_deg.to_radians()),
                BodyVelocity::new(v.start.speed, 0.0, 0.0),
            );
            let truth = TruthVehicle::new(start, v.lambda_speed, v.lambda_yaw);
            let mut icfg = InnerLoopConfig::new(kind);
            if let Some(p) = cfg.control.pid {
                icfg.pid = p;
            }
            if let Some(a) = cfg.control.speed_adaptation {
                icfg.speed_adaptation = a;
            }
            if let Some(a) = cfg.control.yaw_adaptation {
                icfg.yaw_adaptation = a;
            }
            // The controller is designed on the nominal model, never the truth.
            let nominal = usv_core::vehicle::ClosedLoopModel::default();
            let controller = InnerLoop::new(icfg, &nominal.speed, &nominal.sway_yaw)?;
            let mission = Mission::new(&v.mission, base_dt)?;
            let grid = match mission {
                Mission::Unrep(_) => DecisionGrid::uniform(2.0, 0.01, 1f64.to_radians())?,
                Mission::Path(_) => DecisionGrid::standard(),
            };
            vehicles.push(VehicleRt {
                truth,
                nav: NavSolution::exact(&start),
                sensors: Sensors::new(&cfg.sensors, &cfg.rates, cfg.seed, i),
                mission,
                grid,
                helm: HelmFilterState::settled(v.start.speed, 0.0),
                decision: BehaviorDecision::new(v.start.speed, start.pose.theta),
                reference: Reference::default(),
                controller,
                out: InnerLoopOutput::default(),
                loads: PlantLoads::default(),
                scheduled: FaultConfig::identity(),
                active: Vec::new(),
                progress: BTreeSet::new(),
                estimator: cfg.estimator.as_ref().map(|e| VehicleEstimator::new(e, ctrl_dt)),
                shared: VecDeque::new(),
                certify_unsupported: false,
            });
        }
        let mut records = Vec::new();
        records.push(RunLog::header(cfg, kind));
        Ok(Self {
            cfg,
            vehicles,
            records,
            events: Vec::new(),
            fired: vec![false; cfg.disturbances.len()],
            inv: Invocations::default(),
            projection_violations: 0,
            certify_unsafe: 0,
            min_separation: None,
            outcome: None,
        })
    }

    fn event(&mut self, t: f64, vehicle: Option<usize>, name: &str, detail: String) {
        self.events.push(EventSummary {
            t,
            vehicle,
            name: name.to_string(),
        });
        self.records.push(Record::Event {
            t,
            vehicle,
            name: name.to_string(),
            detail,
        });
    }

    /// Returns the simulated end time.
    fn execute(&mut self) -> SimResult<f64> {
        let rates = self.cfg.rates;
        let dt = rates.base_dt();
        let every = |r: u32| rates.every(r);
        let max_ticks = (self.cfg.duration * rates.base as f64).round() as u64;
        let mut k: u64 = 0;
        while k < max_ticks {
            let t = k as f64 * dt;
            self.inv.base += 1;
            self.disturbances(k, t);
            self.sense(k, t);
            if k % every(rates.helm) == 0 {
                self.inv.helm += 1;
                self.helm_decisions()?;
            }
            for v in &mut self.vehicles {
                let (u, r, next) = helm_filter_step(v.helm, &v.decision, v.nav.theta, dt);
                v.helm = next;
                v.reference = Reference {
                    u_des: u,
                    r_des: r,
                    theta_des: v.decision.theta_des,
                };
            }
            if k % every(rates.controller) == 0 {
                self.inv.controller += 1;
                self.control(t)?;
            }
            if self.cfg.estimator.is_some() && k % every(rates.estimator) == 0 {
                self.inv.estimator += 1;
                let do_certify = self.cfg.certify.is_some() && k % every(rates.certify) == 0;
                if do_certify {
                    self.inv.certify += 1;
                }
                self.estimate(t, do_certify)?;
            }
            self.proximity(t);
            if k % every(rates.log) == 0 {
                self.log_ticks(t);
            }
            if self.outcome.is_some() {
                return Ok(t);
            }
            for v in &mut self.vehicles {
                v.truth.step(v.out.u_thr, v.out.u_rud, &v.loads, dt)?;
            }
            k += 1;
            if k % rates.base as u64 == 0 && self.all_paths_complete() {
                let t_end = k as f64 * dt;
                self.event(t_end, None, "mission-complete", String::new());
                self.outcome = Some(Outcome::Completed);
                return Ok(t_end);
            }
        }
        self.outcome = Some(Outcome::Timeout);
        let t_end = k as f64 * dt;
        self.event(t_end, None, "timeout", String::new());
        Ok(t_end)
    }

    fn all_paths_complete(&self) -> bool {
        self.vehicles
            .iter()
            .filter_map(|v| v.mission.as_path())
            .all(|p| p.complete)
    }

    fn disturbances(&mut self, k: u64, t: f64) {
        let cfg = self.cfg;
        for (i, d) in cfg.disturbances.iter().enumerate() {
            if self.fired[i] {
                continue;
            }
            let targets: Vec<usize> = match d.vehicle {
                Some(v) => vec![v],
                None => (0..self.vehicles.len()).collect(),
            };
            let due = match &d.trigger {
                Trigger::Start => k == 0,
                Trigger::Time { at } => t + 1e-9 >= *at,
                Trigger::Station { at } => targets.iter().any(|&v| {
                    self.vehicles[v]
                        .mission
                        .as_path()
                        .is_some_and(|p| p.nav_track.station >= *at)
                }),
                Trigger::Event { name } => targets.iter().any(|&v| self.vehicles[v].progress.contains(name)),
            };
            if !due {
                continue;
            }
            self.fired[i] = true;
            for &v in &targets {
                let rt = &mut self.vehicles[v];
                match d.kind {
                    DisturbanceKind::Fault => {
                        rt.scheduled = rt.scheduled.compose(d.fault.as_ref().expect("validated"));
                        rt.loads.fault = rt.scheduled;
                    }
                    DisturbanceKind::Drogue | DisturbanceKind::Sail => {
                        rt.loads.surge_bias += d.surge_bias;
                        rt.loads.yaw_bias += d.yaw_bias;
                    }
                    DisturbanceKind::Current => {
                        let c = d.current.expect("validated");
                        rt.loads.current = (rt.loads.current.0 + c[0], rt.loads.current.1 + c[1]);
                    }
                }
                rt.active.push(d.name.clone());
            }
            let who = d.vehicle;
            self.event(t, who, "disturbance-onset", d.name.clone());
        }
    }

    fn sense(&mut self, k: u64, t: f64) {
        let mut progress = Vec::new();
        for (i, v) in self.vehicles.iter_mut().enumerate() {
            v.sensors.sample(k, &v.truth.state, &mut v.nav);
            v.shared.push_back(v.nav);
            if v.shared.len() > 1 + self.cfg.rates.base as usize * 10 {
                v.shared.pop_front();
            }
            if let Some(p) = v.mission.as_path_mut() {
                p.truth_track.update(&p.path, (v.truth.state.pose.x, v.truth.state.pose.y));
                for name in p.advance((v.nav.x, v.nav.y)) {
                    v.progress.insert(name.clone());
                    progress.push((i, name));
                }
            }
        }
        for (i, name) in progress {
            self.event(t, Some(i), "progress", name);
        }
    }

    /// State vehicle `i` broadcasts, as seen `latency` ticks later.
    fn shared_state(&self, i: usize, latency: u64) -> VehicleState {
        let h = &self.vehicles[i].shared;
        let idx = h.len().saturating_sub(1 + latency as usize);
        h[idx].to_state()
    }

    fn helm_decisions(&mut self) -> SimResult<()> {
        let tau_theta = HelmFilterState::default().tau_theta;
        let mut decisions = Vec::with_capacity(self.vehicles.len());
        for v in &self.vehicles {
            let pose = Pose::new(v.nav.x, v.nav.y, v.nav.theta);
            let u_sog = v.nav.u.hypot(v.nav.v);
            let raw = match &v.mission {
                Mission::Path(p) => {
                    if p.complete {
                        BehaviorDecision::new(0.0, v.nav.theta)
                    } else {
                        p.decide(&pose, u_sog, tau_theta)?
                    }
                }
                Mission::Unrep(m) => {
                    let guide = self.shared_state(m.guide, m.latency_ticks);
                    m.decide(&guide, &pose, u_sog).0
                }
            };
            let utility = PeakedUtility::around(&raw);
            let f = |s: f64, h: f64| utility.eval(s, h);
            decisions.push(arbiter(&v.grid, &[WeightedUtility { weight: 1.0, utility: &f }])?);
        }
        for (v, d) in self.vehicles.iter_mut().zip(decisions) {
            v.decision = d;
        }
        Ok(())
    }

    fn control(&mut self, _t: f64) -> SimResult<()> {
        let dt = 1.0 / self.cfg.rates.controller as f64;
        for v in &mut self.vehicles {
            let m = Measurement {
                u: v.nav.u,
                v: v.nav.v,
                r: v.nav.r,
                theta: v.nav.theta,
            };
            v.out = v.controller.step(&m, &v.reference, dt);
            if !v.controller.weights_within_bounds() {
                self.projection_violations += 1;
            }
        }
        Ok(())
    }

    fn estimate(&mut self, t: f64, do_certify: bool) -> SimResult<()> {
        let dt = 1.0 / self.cfg.rates.estimator as f64;
        let mut events = Vec::new();
        for i in 0..self.vehicles.len() {
            let v = &mut self.vehicles[i];
            let Some(est) = v.estimator.as_mut() else { continue };
            let applied = v.controller.applied_policy().expect("controller ran this tick");
            let estimate = match est.push(v.nav.to_array(), applied) {
                Ok(Some(e)) => e,
                Ok(None) => continue,
                Err(e) => {
                    events.push((i, "estimator-error", e.to_string()));
                    continue;
                }
            };
            self.inv.estimator_solves += 1;
            let policy = v.controller.policy(&v.reference, dt);
            let d = &estimate.disturbance;
            let vec = |x: &DVector<f64>| x.iter().copied().collect::<Vec<f64>>();
            self.records.push(Record::Estimate {
                t,
                vehicle: i,
                x_hat: vec(&estimate.x_hat),
                q_diag: estimate.q_filtered.diagonal().iter().copied().collect(),
                mu_hat: vec(&d.mu_hat),
                w_hat_diag: vec(&d.w_hat_diag),
                delta_mu: vec(&d.delta_mu),
                delta_sigma: vec(&d.delta_sigma),
                iterations: estimate.iterations,
                objective: estimate.objective,
                policy,
                dt,
            });
            let Some(ccfg) = self.cfg.certify.as_ref().filter(|_| do_certify) else { continue };
            let graph = match build_closed_loop_graph(&policy, est.model(), dt) {
                Ok(g) => g,
                Err(e) => {
                    if !v.certify_unsupported {
                        v.certify_unsupported = true;
                        events.push((i, "certify-skipped", e.to_string()));
                    }
                    continue;
                }
            };
            let input = CertifyInput {
                x_hat: estimate.x_hat.clone(),
                q: estimate.q_filtered.clone(),
                disturbance: estimate.disturbance.clone(),
            };
            let cert = certify(&graph, &input, ccfg.horizon, ccfg.gamma, &ccfg.unsafe_region)?;
            self.inv.certify_runs += 1;
            if !cert.safe {
                self.certify_unsafe += 1;
            }
            self.records.push(certify_record(t, i, ccfg.horizon, ccfg.gamma, &cert));
        }
        for (i, name, detail) in events {
            self.event(t, Some(i), name, detail);
        }
        Ok(())
    }

    /// Hull wash and bank effect from the true geometry; may end the run.
    fn proximity(&mut self, t: f64) {
        let n = self.vehicles.len();
        let mut extra = vec![0.0; n];
        if n == 2 {
            let (a, b) = (self.vehicles[0].truth.state.pose, self.vehicles[1].truth.state.pose);
            let sep = (a.x - b.x).hypot(a.y - b.y);
            self.min_separation = Some(self.min_separation.map_or(sep, |m| m.min(sep)));
            if let Some(hw) = &self.cfg.hull_wash {
                for (i, (own, other)) in [(a, b), (b, a)].into_iter().enumerate() {
                    let (along, cross) = frame_offset(&other, &own);
                    // Equal and opposite: each bow is drawn toward the other hull.
                    let (_, side) = frame_offset(&own, &other);
                    let delta = if side >= 0.0 { 1.0 } else { -1.0 };
                    extra[i] = hull_wash(along.abs(), cross.abs(), delta, hw);
                }
            }
        }
        let mut halted = Vec::new();
        if let Some(canal) = &self.cfg.canal {
            let az = usv_core::guidance::azimuth((canal.start[0], canal.start[1]), (canal.end[0], canal.end[1]));
            for (i, v) in self.vehicles.iter().enumerate() {
                let p = v.truth.state.pose;
                let dy = -(p.x - canal.start[0]) * az.sin() + (p.y - canal.start[1]) * az.cos();
                let delta = if dy >= 0.0 { 1.0 } else { -1.0 };
                match bank_effect(dy.abs(), delta, &canal.bank) {
                    BankEffect::Bias(f) => extra[i] += f,
                    h @ BankEffect::Halt(_) => halted.push((i, dy, h)),
                }
            }
        }
        for (i, v) in self.vehicles.iter_mut().enumerate() {
            v.loads.fault = v.scheduled.with_rotational_bias(extra[i]);
        }
        for (i, dy, h) in halted {
            let v = &mut self.vehicles[i];
            v.loads.fault = v.loads.fault.compose(&h.as_fault());
            v.truth.halt();
            self.event(t, Some(i), "halt", format!("ran aground at {dy:.2} m from the centerline"));
            self.outcome = Some(Outcome::Halted);
        }
        if self.outcome.is_none() {
            self.unrep_checks(t);
        }
    }

    fn unrep_checks(&mut self, t: f64) {
        for i in 0..self.vehicles.len() {
            let Mission::Unrep(m) = &self.vehicles[i].mission else { continue };
            let own = self.vehicles[i].truth.state.pose;
            let guide = self.vehicles[m.guide].truth.state.pose;
            let sep = (own.x - guide.x).hypot(own.y - guide.y);
            if sep < m.min_separation {
                let min = m.min_separation;
                self.event(t, Some(i), "separation-violation", format!("{sep:.2} m < {min:.2} m"));
                self.event(t, Some(i), "abort", "emergency breakaway".into());
                self.outcome = Some(Outcome::Aborted);
                return;
            }
            if let Some(limit) = m.abort_cross_error {
                let (_, cross) = self.unrep_errors(i);
                if t >= m.acquire_time && cross.abs() > limit {
                    self.event(t, Some(i), "station-loss", format!("cross error {cross:.2} m"));
                    self.event(t, Some(i), "abort", "emergency breakaway".into());
                    self.outcome = Some(Outcome::Aborted);
                    return;
                }
            }
        }
    }

    /// True `(inline, cross)` station error of an approach vehicle.
    fn unrep_errors(&self, i: usize) -> (f64, f64) {
        let v = &self.vehicles[i];
        let Mission::Unrep(m) = &v.mission else { return (0.0, 0.0) };
        let guide = &self.vehicles[m.guide].truth.state;
        m.decide(guide, &v.truth.state.pose, v.truth.state.vel.u).1
    }

    fn log_ticks(&mut self, t: f64) {
        for i in 0..self.vehicles.len() {
            let position = match &self.vehicles[i].mission {
                Mission::Path(p) => {
                    let s = &self.vehicles[i].truth.state;
                    p.path
                        .project_window(
                            (s.pose.x, s.pose.y),
                            p.truth_track.station - 1e-9,
                            p.truth_track.station + 1e-9,
                        )
                        .cross_track
                        .abs()
                }
                Mission::Unrep(_) => {
                    let (a, c) = self.unrep_errors(i);
                    a.hypot(c)
                }
            };
            let v = &self.vehicles[i];
            let s = v.truth.state;
            let reference = v.reference;
            let errors = TickErrors {
                speed: reference.u_des - s.vel.u,
                heading_deg: delta_theta(s.pose.theta, reference.theta_des).to_degrees(),
                yaw_rate: reference.r_des - s.vel.r,
                position,
            };
            let (l, r) = v.truth.delivered(v.out.u_thr, v.out.u_rud, &v.loads.fault);
            self.records.push(Record::Tick {
                t,
                vehicle: i,
                truth: s.to_array(),
                meas: v.nav.to_array(),
                reference,
                command: Command {
                    u_thr: v.out.u_thr,
                    u_rud: v.out.u_rud,
                    u_ad_thr: v.out.u_ad_thr,
                    u_ad_rud: v.out.u_ad_rud,
                },
                thrusters: [l, r],
                faults: v.active.clone(),
                errors,
                mrac_error: [v.out.speed_error_norm, v.out.yaw_error_norm],
            });
        }
    }
}

/// `(along, cross)` of `other` relative to `own`, in `own`'s body frame.
fn frame_offset(own: &Pose, other: &Pose) -> (f64, f64) {
    let (dx, dy) = (other.x - own.x, other.y - own.y);
    let (s, c) = own.theta.sin_cos();
    (dx * c + dy * s, -dx * s + dy * c)
}

pub(crate) fn certify_record(t: f64, vehicle: usize, horizon: usize, gamma: f64, cert: &usv_core::reach::Certificate) -> Record {
    let corner = |f: &dyn Fn(usize) -> f64| -> [f64; 6] { std::array::from_fn(f) };
    Record::Certify {
        t,
        vehicle,
        horizon,
        gamma,
        safe: cert.safe,
        first_violation: cert.first_violation,
        lo: cert.rsoa.iter().map(|r| corner(&|i| r.lo(i))).collect(),
        hi: cert.rsoa.iter().map(|r| corner(&|i| r.hi(i))).collect(),
    }
}
