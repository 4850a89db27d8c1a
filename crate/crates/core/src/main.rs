fn main() {
    std::process::exit(krillwalk::cli::run_from_env());
}
