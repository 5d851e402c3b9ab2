//! Shared model preparation and per-scenario execution.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use log::info;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{aggregate, assemble, hour_stamps, write_detailed, write_summary, OutputTable, SummaryTable};
use super::{RunConfig, ScenarioDescriptor};
use crate::bau::{
    build_features, project_daily, raw_features, DailySeries, PenalizedLinearModel, Target, WeatherIndex,
};
use crate::calendar::{model_days, same_day_in, DayType, REFERENCE_YEAR, TRAINING_FIRST_YEAR, TRAINING_LAST_YEAR};
use crate::cooling::{
    cooling_hourly, income_ranks, income_weights, national_cooling_energy, sector_ratio, split_states, AcMarket,
    CoolingProfiles, CoolingScenario,
};
use crate::ev::{
    charging_profile, ev_hourly, fleet_energy_day, project_fleet, range_mix, segments_from_rows, ChargingScheme,
    FleetStateYear, Segment, VehicleSegment,
};
use crate::gdp::{group_shares, GdpProjections, GdpScenario, Population, StableTable};
use crate::hourly::{build_clusters, synthesize_year, ClusterSet, DayTargets, ReferenceWeather};
use crate::ingest::{InputBundle, ProfileContext, Region};
use crate::variation::{apply_noise, estimate_noise, NoiseModel, NoiseVector};
use crate::{rng, Result};

/// Counters of corrective actions taken while projecting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionStats {
    pub negative_predictions: usize,
    pub noise_floor_clamps: usize,
    pub infeasible_days_repaired: usize,
    pub floored_days: usize,
    pub days: usize,
}

impl ProjectionStats {
    fn add(&mut self, other: &ProjectionStats) {
        self.negative_predictions += other.negative_predictions;
        self.noise_floor_clamps += other.noise_floor_clamps;
        self.infeasible_days_repaired += other.infeasible_days_repaired;
        self.floored_days += other.floored_days;
        self.days += other.days;
    }
}

/// Regional business-as-usual hourly traces for one GDP scenario.
#[derive(Debug, Clone)]
pub struct BaseSet {
    pub traces: BTreeMap<(Region, i32), Vec<f64>>,
    pub daily: BTreeMap<(Region, i32, Target), DailySeries>,
    pub stats: ProjectionStats,
}

/// Everything derived from the inputs that every scenario shares.
pub struct Pipeline<'a> {
    pub config: &'a RunConfig,
    pub bundle: &'a InputBundle,
    pub gdp: GdpProjections,
    pub population: Population,
    pub clusters: BTreeMap<Region, ClusterSet>,
    pub reference_weather: BTreeMap<Region, ReferenceWeather>,
    pub models: BTreeMap<(Region, Target), PenalizedLinearModel>,
    pub noise: NoiseModel,
    /// Historical weather year used for each projected year.
    pub weather_years: BTreeMap<i32, i32>,
    pub market: AcMarket,
    pub segments: BTreeMap<Segment, VehicleSegment>,
    weather: WeatherIndex<'a>,
}

/// Demand history of a region over the training window, by date.
pub(crate) fn demand_history(bundle: &InputBundle, region: Region) -> Vec<(NaiveDate, f64, f64)> {
    bundle
        .demand
        .iter()
        .filter(|r| r.region == region && (TRAINING_FIRST_YEAR..=TRAINING_LAST_YEAR).contains(&r.date.year()))
        .map(|r| (r.date, r.peak_mw, r.energy_mwh))
        .collect()
}

pub(crate) fn target_values(history: &[(NaiveDate, f64, f64)], target: Target) -> Vec<f64> {
    history
        .iter()
        .map(|(_, p, e)| match target {
            Target::Peak => *p,
            Target::Energy => *e,
        })
        .collect()
}

pub(crate) fn gdp_projections(bundle: &InputBundle, config: &RunConfig) -> Result<GdpProjections> {
    let stable = bundle.stable_anchors.as_deref().map(StableTable::from_rows).transpose()?;
    Ok(GdpProjections::build(&bundle.gdp, stable.as_ref(), &bundle.states, config.gdp_growth)?)
}

/// Draw the historical weather year for each snapshot year.
pub fn draw_weather_years(seed: u64, years: &[i32]) -> BTreeMap<i32, i32> {
    years
        .iter()
        .map(|&y| {
            let mut r = rng::stream(seed, &["weather-year", &y.to_string()], None);
            (y, r.random_range(TRAINING_FIRST_YEAR..=TRAINING_LAST_YEAR))
        })
        .collect()
}

impl<'a> Pipeline<'a> {
    pub fn prepare(bundle: &'a InputBundle, config: &'a RunConfig) -> Result<Self> {
        config.validate()?;
        let gdp = gdp_projections(bundle, config)?;
        let violations = gdp.ordering_violations();
        if !violations.is_empty() {
            log::warn!("GDP scenarios are out of order in {} years: {violations:?}", violations.len());
        }
        let weather = WeatherIndex::new(&bundle.weather);
        let population = Population::from_rows(&bundle.population);

        let mut clusters = BTreeMap::new();
        let mut reference_weather = BTreeMap::new();
        for region in Region::ALL {
            let reference = bundle
                .reference
                .get(&region)
                .ok_or_else(|| super::RunError::Config(format!("no reference year for {region}")))?;
            clusters.insert(region, build_clusters(reference)?);
            let temps = model_days(REFERENCE_YEAR)
                .into_iter()
                .map(|d| Ok((d, weather.regional_t2m(&bundle.catalog, region, d)?)))
                .collect::<Result<Vec<_>>>()?;
            reference_weather.insert(region, ReferenceWeather::new(temps)?);
        }

        let jobs: Vec<(Region, Target)> =
            Region::ALL.iter().flat_map(|r| Target::ALL.iter().map(move |t| (*r, *t))).collect();
        let trained: Vec<(Region, Target, PenalizedLinearModel, Vec<(NaiveDate, f64)>)> = jobs
            .par_iter()
            .map(|&(region, target)| {
                let history = demand_history(bundle, region);
                let dates: Vec<NaiveDate> = history.iter().map(|h| h.0).collect();
                let hist_gdp = gdp.region(GdpScenario::Slow, region)?;
                let raw = raw_features(&weather, &bundle.catalog, region, &dates, |d| d, |y| hist_gdp.get(y))?;
                let features = build_features(raw, |_| true)?;
                let y = target_values(&history, target);
                let model = PenalizedLinearModel::train(&features, &y, target, TRAINING_LAST_YEAR, &config.bau)?;
                let rows = features.rows_where(|d| d.year() == TRAINING_LAST_YEAR);
                let pred = model.predict(&features.select_rows(&rows));
                let residuals = rows.iter().zip(pred).map(|(&i, p)| (dates[i], y[i] - p)).collect();
                info!(
                    "{region} {target}: alpha {:.4e}, {} of {} coefficients nonzero, train R2 {:.3}",
                    model.alpha,
                    model.coefficients.iter().filter(|b| **b != 0.0).count(),
                    model.coefficients.len(),
                    model.train_r2
                );
                Ok((region, target, model, residuals))
            })
            .collect::<Result<_>>()?;
        let mut models = BTreeMap::new();
        let mut noise = NoiseModel::default();
        for (region, target, model, residuals) in trained {
            noise.insert(region, target, estimate_noise(&residuals)?)?;
            models.insert((region, target), model);
        }

        Ok(Pipeline {
            config,
            bundle,
            gdp,
            population,
            clusters,
            reference_weather,
            models,
            noise,
            weather_years: draw_weather_years(config.seed, &config.snapshot_years),
            market: AcMarket::from_rows(&bundle.ac_market),
            segments: segments_from_rows(&bundle.ev_params)?,
            weather,
        })
    }

    /// Daily projections (with natural variation when enabled) and hourly
    /// business-as-usual traces for every region and snapshot year.
    pub fn base(&self, scenario: GdpScenario) -> Result<BaseSet> {
        let cells: Vec<(Region, i32)> = Region::ALL
            .iter()
            .flat_map(|r| self.config.snapshot_years.iter().map(move |y| (*r, *y)))
            .collect();
        let results: Vec<_> = cells
            .par_iter()
            .map(|&(region, year)| self.base_cell(scenario, region, year).map(|r| ((region, year), r)))
            .collect::<Result<_>>()?;
        let mut set = BaseSet { traces: BTreeMap::new(), daily: BTreeMap::new(), stats: ProjectionStats::default() };
        for ((region, year), (trace, peak, energy, stats)) in results {
            set.traces.insert((region, year), trace);
            set.daily.insert((region, year, Target::Peak), peak);
            set.daily.insert((region, year, Target::Energy), energy);
            set.stats.add(&stats);
        }
        Ok(set)
    }

    fn base_cell(
        &self,
        scenario: GdpScenario,
        region: Region,
        year: i32,
    ) -> Result<(Vec<f64>, DailySeries, DailySeries, ProjectionStats)> {
        let dates = model_days(year);
        let source = self.weather_years[&year];
        let path = self.gdp.region(scenario, region)?;
        let raw = raw_features(
            &self.weather,
            &self.bundle.catalog,
            region,
            &dates,
            |d| same_day_in(d, source),
            |y| path.get(y),
        )?;
        let mut stats = ProjectionStats { days: dates.len(), ..Default::default() };
        let mut series = Vec::with_capacity(2);
        for target in Target::ALL {
            let projection = project_daily(&self.models[&(region, target)], &raw)?;
            stats.negative_predictions += projection.clamped;
            let s = if self.config.noise {
                let noisy = apply_noise(&projection.series, self.noise.get(region, target)?, self.config.seed);
                stats.noise_floor_clamps += noisy.clamped;
                noisy.series
            } else {
                projection.series
            };
            series.push(s);
        }
        let energy = series.pop().unwrap();
        let peak = series.pop().unwrap();
        let temps: Vec<f64> = dates
            .iter()
            .map(|d| self.weather.regional_t2m(&self.bundle.catalog, region, same_day_in(*d, source)))
            .collect::<std::result::Result<_, _>>()?;
        let targets = DayTargets { dates: &dates, energy: &energy.values, peak: &peak.values, temps: Some(&temps) };
        let synth = synthesize_year(
            &self.clusters[&region],
            &targets,
            Some(&self.reference_weather[&region]),
            self.config.weather_scaling,
            self.config.seed,
            region.code(),
        )?;
        stats.infeasible_days_repaired += synth.repaired;
        stats.floored_days += synth.floored;
        Ok((synth.values, peak, energy, stats))
    }

    /// Noise adjustments applied to each region and target, all snapshot
    /// years concatenated.
    pub fn noise_vectors(&self) -> Result<Vec<NoiseVector>> {
        let mut out = Vec::new();
        for region in Region::ALL {
            for target in Target::ALL {
                let stats = self.noise.get(region, target)?;
                let mut all = NoiseVector { region, target, seed: self.config.seed, dates: vec![], adjustments: vec![] };
                for &year in &self.config.snapshot_years {
                    let dates = model_days(year);
                    let zero = DailySeries { region, target, values: vec![1.0; dates.len()], dates };
                    let v = apply_noise(&zero, stats, self.config.seed).noise;
                    all.dates.extend(v.dates);
                    all.adjustments.extend(v.adjustments);
                }
                out.push(all);
            }
        }
        Ok(out)
    }

    pub fn states(&self) -> Vec<(&'a str, Region)> {
        self.bundle.states.states().collect()
    }

    /// Share of each state in its region's GDP.
    pub fn regional_shares(&self, scenario: GdpScenario, year: i32) -> Result<BTreeMap<String, f64>> {
        let paths = self.gdp.states(scenario)?;
        Ok(crate::gdp::state_shares(paths, &self.population, &self.bundle.states, year)?
            .into_iter()
            .map(|s| (s.state, s.share))
            .collect())
    }

    fn income_tiers(&self, context: ProfileContext) -> usize {
        self.bundle
            .profiles
            .iter()
            .filter(|p| p.context == context)
            .filter_map(|p| p.income)
            .max()
            .map_or(0, |m| m as usize + 1)
    }

    /// Residential and commercial hourly AC traces per state for `year`.
    pub fn cooling(
        &self,
        scenario: GdpScenario,
        cooling: CoolingScenario,
        year: i32,
    ) -> Result<BTreeMap<String, (Vec<f64>, Vec<f64>)>> {
        let cfg = &self.config.cooling_model;
        let states = self.states();
        let names: Vec<&str> = states.iter().map(|s| s.0).collect();
        let paths = self.gdp.states(scenario)?;
        let gdp_of = |s: &str| paths.get(s).and_then(|p| p.get(year));
        let shares: Vec<(String, f64)> = group_shares("IN", &names, gdp_of, &self.population, year)?
            .into_iter()
            .map(|s| (s.state, s.share))
            .collect();
        let ratios = names
            .iter()
            .map(|s| Ok((s.to_string(), sector_ratio(&self.bundle.sector, s, year)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let national = national_cooling_energy(&self.market, year, cooling)? * cfg.climate_multiplier(year);
        let split = split_states(national, &shares, &ratios, year, cooling)?;
        let per_capita: Vec<(String, f64)> = names
            .iter()
            .map(|s| {
                let pop = self.population.get(s, year).unwrap_or(1.0).max(1.0);
                (s.to_string(), gdp_of(s).unwrap_or(0.0) / pop)
            })
            .collect();
        let ranks = income_ranks(&per_capita);
        let res_tiers = self.income_tiers(ProfileContext::Residential);
        let com_tiers = self.income_tiers(ProfileContext::Commercial);
        let mut out = BTreeMap::new();
        for s in split {
            let rank = ranks[&s.state];
            let res = CoolingProfiles::build(
                &self.bundle.profiles,
                ProfileContext::Residential,
                &income_weights(rank, res_tiers),
                cfg,
            )?;
            let com = CoolingProfiles::build(
                &self.bundle.profiles,
                ProfileContext::Commercial,
                &income_weights(rank, com_tiers),
                cfg,
            )?;
            out.insert(
                s.state.clone(),
                (cooling_hourly(s.residential_gwh, year, &res, cfg), cooling_hourly(s.commercial_gwh, year, &com, cfg)),
            );
        }
        Ok(out)
    }

    pub fn fleets(&self, scenario: GdpScenario) -> Result<BTreeMap<String, Vec<FleetStateYear>>> {
        let last = *self.config.snapshot_years.iter().max().unwrap();
        Ok(project_fleet(&self.bundle.vehicle_sales, self.gdp.states(scenario)?, scenario, last, &self.config.ev_model)?)
    }

    /// Hourly charging traces per state and segment for `year`.
    pub fn ev(
        &self,
        fleets: &BTreeMap<String, Vec<FleetStateYear>>,
        scheme: ChargingScheme,
        year: i32,
    ) -> Result<BTreeMap<String, [Vec<f64>; 3]>> {
        let cfg = &self.config.ev_model;
        let mix = range_mix(year, cfg);
        let weekday = charging_profile(&self.bundle.profiles, scheme, DayType::Weekday, mix, &cfg.kernel)?;
        let weekend = charging_profile(&self.bundle.profiles, scheme, DayType::Weekend, mix, &cfg.kernel)?;
        let mut out = BTreeMap::new();
        for (state, years) in fleets {
            let fy = years.iter().find(|f| f.year == year).ok_or(crate::gdp::GdpError::YearOutOfRange(year))?;
            let traces = Segment::ALL.map(|segment| {
                let count = fy.counts.get(segment);
                let urban = count * fy.urban_fraction;
                let day = fleet_energy_day(urban, count - urban, &self.segments[&segment]);
                ev_hourly(day.energy_kwh / 1000.0, year, &weekday, &weekend)
            });
            out.insert(state.clone(), traces);
        }
        Ok(out)
    }

    /// Assemble, aggregate and write every geography of one scenario.
    pub fn run_scenario(
        &self,
        descriptor: &ScenarioDescriptor,
        base: &BaseSet,
        fleets: &BTreeMap<String, Vec<FleetStateYear>>,
        out: &Path,
    ) -> Result<ScenarioOutput> {
        let dir = out.join(descriptor.path());
        let mut summaries: BTreeMap<String, SummaryTable> = BTreeMap::new();
        let mut files = 0;
        for &year in &self.config.snapshot_years {
            let tables = self.scenario_year(descriptor, base, fleets, year)?;
            for t in &tables {
                summaries
                    .entry(t.geography.clone())
                    .or_insert_with(|| SummaryTable { geography: t.geography.clone(), rows: vec![] })
                    .rows
                    .push((year, t.annual_gwh()));
            }
            if year == self.config.detail_year {
                let stamps = hour_stamps(year);
                for t in &tables {
                    write_detailed(&dir.join("detailed").join(format!("{}.csv", t.geography)), t, &stamps)?;
                    files += 1;
                }
            }
        }
        for s in summaries.values() {
            write_summary(&dir.join("summary").join(format!("{}.csv", s.geography)), s)?;
            files += 1;
        }
        Ok(ScenarioOutput { descriptor: *descriptor, files })
    }

    /// Tables for every state, region and the nation, in that order.
    pub fn scenario_year(
        &self,
        descriptor: &ScenarioDescriptor,
        base: &BaseSet,
        fleets: &BTreeMap<String, Vec<FleetStateYear>>,
        year: i32,
    ) -> Result<Vec<OutputTable>> {
        let shares = self.regional_shares(descriptor.gdp, year)?;
        let mut cooling = self.cooling(descriptor.gdp, descriptor.cooling, year)?;
        let mut ev = self.ev(fleets, descriptor.charging, year)?;
        let mut tables = Vec::new();
        for (state, region) in self.states() {
            let region_trace = &base.traces[&(region, year)];
            let share = shares[state];
            let (res, com) = cooling.remove(state).unwrap_or_else(|| (vec![0.0; 8760], vec![0.0; 8760]));
            let [e2w, e3w, e4w] = ev.remove(state).unwrap_or_else(|| std::array::from_fn(|_| vec![0.0; 8760]));
            let base_col: Vec<f64> = region_trace.iter().map(|v| v * share).collect();
            tables.push(assemble(state, year, [base_col, com, res, e2w, e3w, e4w])?);
        }
        let mut regional = Vec::new();
        for region in Region::ALL {
            let members: Vec<&OutputTable> = tables
                .iter()
                .filter(|t| self.bundle.states.region_of(&t.geography) == Some(region))
                .collect();
            regional.push(aggregate(region.code(), &members)?);
        }
        let national = aggregate("IN", &regional.iter().collect::<Vec<_>>())?;
        tables.extend(regional);
        tables.push(national);
        Ok(tables)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutput {
    pub descriptor: ScenarioDescriptor,
    pub files: usize,
}
