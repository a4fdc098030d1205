from editables.redirector import RedirectingFinder as F
F.install()
F.map_module('suspicion', '/root/pkg/src/suspicion/__init__.py')
F.map_module('_suspicion', '/root/pkg/src/_suspicion/__init__.py')