fn main() {
    std::process::exit(chatterkit::cli::run());
}
