fn main() -> std::process::ExitCode {
    socmf::cli::main()
}
