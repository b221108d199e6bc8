import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'numod_project.settings')
django.setup()
