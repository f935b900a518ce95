fn main() {
    std::process::exit(pfilter::cli::run());
}
