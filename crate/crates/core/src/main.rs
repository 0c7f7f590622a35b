fn main() {
    std::process::exit(isoneigh::cli::run());
}
