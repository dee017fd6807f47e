//! Fixtures shared by the benchmarks in `benches/`.

use urllc_core::{
    AvailabilityScenario, ChannelParams, DelayBudget, McBudget, ModeId, QosRequirement,
    SystemParams,
};

/// Default-parameter scenario with `Nt` antennas and `D_p = D_b = T_f`.
pub fn scenario(mode: ModeId, nt: u32) -> AvailabilityScenario {
    AvailabilityScenario {
        mode,
        channel: ChannelParams::default(),
        sys: SystemParams {
            nt,
            ..SystemParams::default()
        },
        qos: QosRequirement::default(),
        budget: DelayBudget {
            d_max: 1e-3,
            d_p: 1e-4,
            d_b: 1e-4,
            t1: 4e-4,
            t2: 4e-4,
        },
        r_cell: 250.0,
        rho_c: None,
        rho_d: None,
        mc: McBudget::default(),
    }
}
