fn main() {
    std::process::exit(dss_fdd::cli::run(std::env::args_os()));
}
