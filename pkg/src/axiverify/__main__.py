from axiverify.cli import main

raise SystemExit(main())
