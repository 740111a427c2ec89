//! WebAssembly bindings for the demo page in `www/`. Every method returns
//! JSON text; failures surface as JS exceptions carrying the error message.

pub mod explorer;

use aqboost::boosting::Mode;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use explorer::Explorer;

fn json<T: Serialize>(value: aqboost::Result<T>) -> Result<String, JsValue> {
    value
        .and_then(|v| Ok(serde_json::to_string(&v)?))
        .map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub struct Demo {
    inner: Explorer,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_points: usize, noise: f64, pool_size: usize, seed: u64) -> Result<Demo, JsValue> {
        Explorer::new(n_points, noise, pool_size, seed)
            .map(|inner| Demo { inner })
            .map_err(|e| JsValue::from_str(&e.to_string()))
    }

    pub fn points(&self) -> Result<String, JsValue> {
        json(Ok(self.inner.points()))
    }

    pub fn pool(&self) -> Result<String, JsValue> {
        json(Ok(self.inner.pool()))
    }

    pub fn alpha_curve(&self, steps: usize) -> Result<String, JsValue> {
        json(self.inner.alpha_curve(steps))
    }

    pub fn select(&mut self, alpha: f64) -> Result<String, JsValue> {
        json(self.inner.select(alpha))
    }

    pub fn selection_grid(&self, resolution: usize) -> Result<Vec<i8>, JsValue> {
        self.inner
            .selection_grid(resolution)
            .map_err(|e| JsValue::from_str(&e.to_string()))
    }

    /// `mode` is one of `alpha_qboost`, `qboost_lambda` or `adaboost`.
    pub fn train(&self, mode: &str, target_size: usize, resolution: usize) -> Result<String, JsValue> {
        let mode: Mode = serde_json::from_value(serde_json::Value::String(mode.to_string()))
            .map_err(|_| JsValue::from_str(&format!("unknown mode `{mode}`")))?;
        json(self.inner.train_mode(mode, target_size, resolution))
    }
}

#[wasm_bindgen]
pub fn compare_solvers(n_vars: usize, seed: u64, num_reads: usize, sweeps: usize) -> Result<String, JsValue> {
    json(explorer::compare_solvers(n_vars, seed, num_reads, sweeps))
}

#[wasm_bindgen]
pub fn version() -> String {
    aqboost::VERSION.to_string()
}
