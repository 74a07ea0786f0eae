//! Tick ingestion, session grids and synchronized return panels.

mod panel;
mod session;
mod ticks;

pub use panel::{
    build_panel, build_panels, panel_file_name, read_panel_csv, write_drop_log, write_panel_csv, DropReason,
    DropRecord, PanelSet, ReturnPanel, DATE_FORMAT, TIME_FORMAT,
};
pub use session::{
    read_date_list, sample_last_tick, PriceGrid, SessionSpec, TradingCalendar, LOW_TRADE_BIN_SECONDS,
};
pub use ticks::{parse_ticks, RowDiagnostic, TickRecord, TickSchema, TickSeries};
