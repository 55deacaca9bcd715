use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("SENSOR_RANK_LOG", "warn")).init();
    std::process::exit(sensor_rank::cli::main_with_args(std::env::args_os()));
}
