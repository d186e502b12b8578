from qginibre.cli import main

main()
