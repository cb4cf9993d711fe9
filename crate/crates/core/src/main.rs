fn main() {
    std::process::exit(coastline::cli::run(std::env::args_os()));
}
