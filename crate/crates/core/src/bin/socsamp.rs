fn main() {
    std::process::exit(social_sampling::harness::cli::run(std::env::args_os()));
}
