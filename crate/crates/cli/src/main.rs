fn main() {
    std::process::exit(planar_cli::run(std::env::args_os()));
}
